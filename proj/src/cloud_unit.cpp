#include <lbs/cloud_unit.hpp>

#include <lbs/crypto.hpp>
#include <lbs/wire/codec.hpp>

#include <algorithm>
#include <set>

namespace lbs {

std::string_view to_string(ServedBy s) noexcept {
  return s == ServedBy::local ? "local" : "escalated";
}

namespace {

using CategoryIndex = std::map<ServiceCategory, std::vector<std::string>>;

template <typename ById>
CategoryIndex build_index(const ById& by_id) {
  CategoryIndex index;
  // by_id iterates in id order, so each posting list comes out sorted.
  for (const auto& [id, r] : by_id) index[r.food_style].push_back(id);
  return index;
}

}  // namespace

void RestaurantStore::replace(std::vector<Restaurant> records) {
  std::map<std::string, Restaurant, std::less<>> by_id;
  for (auto& r : records) {
    std::string id = r.restaurant_id;
    by_id.insert_or_assign(std::move(id), std::move(r));
  }
  CategoryIndex index = build_index(by_id);
  std::unique_lock lock(mu_);
  by_id_ = std::move(by_id);
  by_category_ = std::move(index);
}

std::vector<Restaurant> RestaurantStore::all() const {
  std::shared_lock lock(mu_);
  std::vector<Restaurant> out;
  out.reserve(by_id_.size());
  for (const auto& [_, r] : by_id_) out.push_back(r);
  return out;
}

std::vector<Restaurant> RestaurantStore::by_category(const ServiceCategory& category) const {
  std::shared_lock lock(mu_);
  std::vector<Restaurant> out;
  auto it = by_category_.find(category);
  if (it == by_category_.end()) return out;
  for (const auto& id : it->second) out.push_back(by_id_.find(id)->second);
  return out;
}

std::optional<Restaurant> RestaurantStore::find(std::string_view restaurant_id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(restaurant_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::set<ServiceCategory> RestaurantStore::categories() const {
  std::shared_lock lock(mu_);
  std::set<ServiceCategory> out;
  for (const auto& [c, _] : by_category_) out.insert(c);
  return out;
}

std::size_t RestaurantStore::size() const {
  std::shared_lock lock(mu_);
  return by_id_.size();
}

bool RestaurantStore::index_consistent() const {
  std::shared_lock lock(mu_);
  return build_index(by_id_) == by_category_;
}

CloudUnit::CloudUnit(ZoneId zone_id, ZoneMap zones, std::shared_ptr<TokenValidator> validator,
                     std::shared_ptr<EscalationChannel> csp, CuOptions options)
    : zone_id_(std::move(zone_id)),
      zones_(std::move(zones)),
      validator_(std::move(validator)),
      csp_(std::move(csp)),
      options_(std::move(options)) {
  if (!zones_.contains(zone_id_)) throw Error(ErrorCode::ConfigError, "unknown zone '" + zone_id_ + "'");
  if (!options_.request_id_source) options_.request_id_source = [] { return crypto::random_hex(16); };
}

IngestReport CloudUnit::ingest_restaurants(std::istream& seed) {
  std::vector<NumberedRecord> records;
  IngestReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(seed, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back({line_no, wire::restaurant_from_json(wire::json::parse(line))});
    } catch (const wire::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
      }
      report.rejected.push_back({line_no, e.code(), e.what()});
    }
  }
  return apply_ingest(std::move(records), std::move(report));
}

IngestReport CloudUnit::ingest_restaurants(std::vector<Restaurant> records) {
  std::vector<NumberedRecord> numbered;
  numbered.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) numbered.push_back({i + 1, std::move(records[i])});
  return apply_ingest(std::move(numbered), {});
}

IngestReport CloudUnit::apply_ingest(std::vector<NumberedRecord> records, IngestReport report) {
  std::vector<Restaurant> accepted;
  std::set<std::string> seen;
  for (auto& [line, r] : records) {
    try {
      if (r.zone_id != zone_id_) {
        throw Error(ErrorCode::ZoneMismatch, "record belongs to zone '" + r.zone_id + "'");
      }
      validate_restaurant(r, zones_);
      if (!seen.insert(r.restaurant_id).second) {
        throw Error(ErrorCode::InvalidField, "duplicate restaurant_id '" + r.restaurant_id + "'");
      }
      accepted.push_back(std::move(r));
    } catch (const Error& e) {
      report.rejected.push_back({line, e.code(), e.what()});
    }
  }
  std::sort(report.rejected.begin(), report.rejected.end(),
            [](const IngestRejection& a, const IngestRejection& b) { return a.line < b.line; });
  std::lock_guard lock(ingest_mu_);
  report.loaded = accepted.size();
  store_.replace(std::move(accepted));
  return report;
}

std::vector<Restaurant> CloudUnit::list_restaurants(const ZoneId& zone) const {
  if (zone != zone_id_) throw Error(ErrorCode::WrongZone, "this unit serves '" + zone_id_ + "'");
  return store_.all();
}

TokenInfo CloudUnit::validate(std::string_view token) {
  const auto now = options_.clock();
  {
    std::lock_guard lock(cache_mu_);
    auto it = cache_.find(token);
    if (it != cache_.end()) {
      if (now - it->second.fetched < options_.validation_ttl) return it->second.info;
      cache_.erase(it);
    }
  }
  TokenInfo info = validator_->introspect(token);
  std::lock_guard lock(cache_mu_);
  cache_.insert_or_assign(std::string(token), CachedValidation{info, now});
  return info;
}

TokenInfo CloudUnit::validate_in_zone(std::string_view token) {
  TokenInfo info = validate(token);
  if (info.current_zone != zone_id_) {
    // The user may have moved since the cached lookup.
    invalidate(token);
    info = validate(token);
    if (info.current_zone != zone_id_) {
      throw Error(ErrorCode::WrongZone, "user is located in '" + info.current_zone.value_or("<none>") +
                                            "', this unit serves '" + zone_id_ + "'");
    }
  }
  return info;
}

void CloudUnit::invalidate(std::string_view token) {
  std::lock_guard lock(cache_mu_);
  if (auto it = cache_.find(token); it != cache_.end()) cache_.erase(it);
}

std::vector<Restaurant> CloudUnit::list_for(std::string_view token) {
  validate_in_zone(token);
  return store_.all();
}

QueryResult CloudUnit::handle_query(std::string_view token, std::string_view category_text) {
  const TokenInfo info = validate_in_zone(token);
  const ServiceCategory category = ServiceCategory::parse(category_text);

  QueryResult result;
  result.source_zone = zone_id_;
  if (info.subscriptions.contains(category)) {
    result.served_by = ServedBy::local;
    result.restaurants = store_.by_category(category);
    return result;
  }

  const EscalationRequest request{options_.request_id_source(), info.user_id, zone_id_, category};
  EscalationResult escalated = csp_->escalate(request);
  // A grant changes the user's subscriptions; the cached view is stale.
  if (escalated.granted_subscription) invalidate(token);

  result.served_by = ServedBy::escalated;
  for (const auto& [_, rs] : escalated.grouped) {
    result.restaurants.insert(result.restaurants.end(), rs.begin(), rs.end());
  }
  result.grouped = std::move(escalated.grouped);
  result.failed_zones = std::move(escalated.failed_zones);
  result.granted_subscription = escalated.granted_subscription;
  return result;
}

Restaurant CloudUnit::get_restaurant_info(std::string_view token, std::string_view restaurant_id) {
  const TokenInfo info = validate(token);
  auto record = store_.find(restaurant_id);
  if (!record) throw Error(ErrorCode::NotFound, std::string(restaurant_id));
  if (!info.subscriptions.contains(record->food_style)) {
    throw Error(ErrorCode::NotAuthorized, "not subscribed to '" + record->food_style.str() + "'");
  }
  return *record;
}

std::vector<Restaurant> CloudUnit::local_search(const ServiceCategory& category) const {
  return store_.by_category(category);
}

}  // namespace lbs
