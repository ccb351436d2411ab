#include <lbs/csp.hpp>

#include <lbs/wire/codec.hpp>

#include <algorithm>
#include <condition_variable>
#include <thread>

namespace lbs {

CuDirectory::CuDirectory(const ZoneMap& zones, const CspOptions& options) : zones_(zones), options_(options) {}

bool CuDirectory::alive(const Endpoint& e, std::chrono::steady_clock::time_point now) const {
  return now - e.last_heartbeat <= options_.heartbeat_interval * options_.missed_beats_allowed;
}

void CuDirectory::register_cu(const ZoneId& zone, const std::string& endpoint) {
  if (!zones_.contains(zone)) throw Error(ErrorCode::UnknownZone, zone);
  if (endpoint.empty()) throw Error(ErrorCode::InvalidField, "empty endpoint");
  const auto now = options_.clock();
  std::lock_guard lock(mu_);
  auto& entry = entries_[zone];
  auto it = std::find_if(entry.endpoints.begin(), entry.endpoints.end(),
                         [&](const Endpoint& e) { return e.address == endpoint; });
  if (it != entry.endpoints.end()) {
    it->last_heartbeat = now;
  } else {
    entry.endpoints.push_back({endpoint, now});
  }
}

std::string CuDirectory::route(const ZoneId& zone) {
  const auto now = options_.clock();
  std::lock_guard lock(mu_);
  auto it = entries_.find(zone);
  if (it == entries_.end() || it->second.endpoints.empty()) throw Error(ErrorCode::NoCuForZone, zone);
  auto& entry = it->second;
  const std::size_t n = entry.endpoints.size();
  for (std::size_t step = 0; step < n; ++step) {
    const auto& candidate = entry.endpoints[(entry.cursor + step) % n];
    if (alive(candidate, now)) {
      entry.cursor = (entry.cursor + step + 1) % n;
      return candidate.address;
    }
  }
  throw Error(ErrorCode::NoCuForZone, zone + " (no live unit)");
}

std::vector<ZoneId> CuDirectory::zones() const {
  std::lock_guard lock(mu_);
  std::vector<ZoneId> out;
  for (const auto& [zone, entry] : entries_) {
    if (!entry.endpoints.empty()) out.push_back(zone);
  }
  return out;
}

std::vector<std::string> CuDirectory::live_endpoints(const ZoneId& zone) const {
  const auto now = options_.clock();
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  if (auto it = entries_.find(zone); it != entries_.end()) {
    for (const auto& e : it->second.endpoints) {
      if (alive(e, now)) out.push_back(e.address);
    }
  }
  return out;
}

bool CuDirectory::empty() const {
  std::lock_guard lock(mu_);
  return entries_.empty();
}

AuditLog::AuditLog(std::optional<std::filesystem::path> path) {
  if (path) {
    file_.open(*path, std::ios::app);
    if (!file_) throw Error(ErrorCode::ConfigError, "cannot open audit log " + path->string());
  }
}

bool AuditLog::append(const AuditRecord& record) {
  std::lock_guard lock(mu_);
  if (!ids_.insert(record.request_id).second) return false;
  records_.push_back(record);
  if (file_.is_open()) {
    const wire::json line{{"request_id", record.request_id},
                          {"user_id", record.user_id.str()},
                          {"origin_zone", record.origin_zone},
                          {"category", record.category.str()},
                          {"timestamp", record.timestamp}};
    file_ << line.dump() << '\n';
    file_.flush();
  }
  return true;
}

std::vector<AuditRecord> AuditLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t AuditLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

CloudServiceProvider::CloudServiceProvider(ZoneMap zones, std::shared_ptr<AccountDirectory> accounts,
                                           std::shared_ptr<CuGateway> gateway, CspOptions options,
                                           std::optional<std::filesystem::path> audit_path)
    : zones_(std::move(zones)),
      accounts_(std::move(accounts)),
      gateway_(std::move(gateway)),
      options_(std::move(options)),
      directory_(zones_, options_),
      audit_(std::move(audit_path)) {}

EscalationResult CloudServiceProvider::handle_escalation(const EscalationRequest& request) {
  if (!zones_.contains(request.origin_zone)) throw Error(ErrorCode::UnknownZone, request.origin_zone);
  accounts_->subscriptions(request.user_id);

  EscalationResult result = cross_location_search(request.category);
  if (options_.grant_on_escalation) {
    accounts_->subscribe(request.user_id, request.category);
    result.granted_subscription = true;
  }
  audit_.append(AuditRecord{request.request_id, request.user_id, request.origin_zone, request.category,
                            now_utc()});
  return result;
}

namespace {

// Shared between the caller and the fan-out workers, which may outlive the
// call when a unit misses the deadline.
struct FanoutState {
  std::mutex mu;
  std::condition_variable done;
  std::size_t pending = 0;
  std::map<ZoneId, std::vector<Restaurant>> answers;
  std::set<ZoneId> failed;
};

}  // namespace

EscalationResult CloudServiceProvider::cross_location_search(const ServiceCategory& category) {
  auto state = std::make_shared<FanoutState>();
  std::vector<ZoneId> targets = directory_.zones();
  const auto deadline = std::chrono::steady_clock::now() + options_.fanout_timeout;

  std::vector<std::pair<ZoneId, std::string>> routed;
  for (const auto& zone : targets) {
    try {
      routed.emplace_back(zone, directory_.route(zone));
    } catch (const Error&) {
      state->failed.insert(zone);
    }
  }
  state->pending = routed.size();
  for (auto& [zone, endpoint] : routed) {
    std::thread([state, gateway = gateway_, zone, endpoint, category, timeout = options_.fanout_timeout] {
      std::optional<std::vector<Restaurant>> found;
      try {
        found = gateway->search(endpoint, category, timeout);
      } catch (...) {
      }
      std::lock_guard lock(state->mu);
      if (found) {
        state->answers.emplace(zone, std::move(*found));
      } else {
        state->failed.insert(zone);
      }
      --state->pending;
      state->done.notify_all();
    }).detach();
  }

  EscalationResult result;
  std::unique_lock lock(state->mu);
  state->done.wait_until(lock, deadline, [&] { return state->pending == 0; });
  for (const auto& [zone, _] : routed) {
    auto it = state->answers.find(zone);
    if (it == state->answers.end()) {
      state->failed.insert(zone);
      continue;
    }
    std::vector<Restaurant> matching;
    for (const auto& r : it->second) {
      if (r.food_style == category) matching.push_back(r);
    }
    std::sort(matching.begin(), matching.end(),
              [](const Restaurant& a, const Restaurant& b) { return a.restaurant_id < b.restaurant_id; });
    if (!matching.empty()) result.grouped.emplace(zone, std::move(matching));
  }
  result.failed_zones.assign(state->failed.begin(), state->failed.end());
  return result;
}

}  // namespace lbs
