#include <lbs/wire/codec.hpp>

namespace lbs::wire {

json ok_envelope(json data, std::string_view message) {
  return json{{"status", "ok"}, {"message", message}, {"data", std::move(data)}};
}

json error_envelope(ErrorCode code) {
  const std::string_view text = code == ErrorCode::AuthFailed ? kAuthFailedMessage : to_string(code);
  return json{{"status", "error"}, {"message", text}};
}

std::optional<ErrorCode> envelope_error(const json& envelope) {
  if (!envelope.is_object() || envelope.value("status", "") != "error") return std::nullopt;
  const std::string message = envelope.value("message", "");
  if (message == kAuthFailedMessage) return ErrorCode::AuthFailed;
  return error_code_from_string(message);
}

bool is_envelope(const json& body) {
  if (!body.is_object() || !body.contains("status") || !body.contains("message")) return false;
  if (!body["message"].is_string()) return false;
  const auto& status = body["status"];
  if (status == "ok") return body.contains("data");
  if (status == "error") {
    if (body.contains("data")) return false;
    return envelope_error(body).has_value();
  }
  return false;
}

const json& require(const json& obj, std::string_view key) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, "missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::vector<std::string> require_string_array(const json& obj, std::string_view key) {
  const json& v = require(obj, key);
  if (!v.is_array()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(ErrorCode::ParseError, "field '" + std::string(key) + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

json to_json(const Restaurant& r) {
  return json{{"restaurant_id", r.restaurant_id},
              {"name", r.name},
              {"address", r.address},
              {"contact", r.contact.str()},
              {"food_style", r.food_style.str()},
              {"x", r.position.x},
              {"y", r.position.y},
              {"zone_id", r.zone_id}};
}

Restaurant restaurant_from_json(const json& j) {
  auto id = require_string(j, "restaurant_id");
  auto name = require_string(j, "name");
  auto address = require_string(j, "address");
  auto contact = require_string(j, "contact");
  auto style = require_string(j, "food_style");
  const double x = require_number(j, "x");
  const double y = require_number(j, "y");
  auto zone = require_string(j, "zone_id");
  return Restaurant{std::move(id),
                    std::move(name),
                    std::move(address),
                    PhoneNumber::parse(contact),
                    ServiceCategory::parse(style),
                    GeoPoint{x, y},
                    std::move(zone)};
}

json to_json(const std::vector<Restaurant>& rs) {
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(to_json(r));
  return arr;
}

std::vector<Restaurant> restaurants_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of restaurants");
  std::vector<Restaurant> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(restaurant_from_json(e));
  return out;
}

json to_json(const GroupedRestaurants& g) {
  json obj = json::object();
  for (const auto& [zone, rs] : g) obj[zone] = to_json(rs);
  return obj;
}

GroupedRestaurants grouped_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "grouped must be an object");
  GroupedRestaurants out;
  for (const auto& [zone, rs] : j.items()) out.emplace(zone, restaurants_from_json(rs));
  return out;
}

json to_json(const EscalationRequest& r) {
  return json{{"request_id", r.request_id},
              {"user_id", r.user_id.str()},
              {"origin_zone", r.origin_zone},
              {"category", r.category.str()}};
}

EscalationRequest escalation_request_from_json(const json& j) {
  auto request_id = require_string(j, "request_id");
  if (request_id.empty()) throw Error(ErrorCode::ParseError, "empty request_id");
  auto user = PhoneNumber::parse(require_string(j, "user_id"));
  auto zone = require_string(j, "origin_zone");
  auto category = ServiceCategory::parse(require_string(j, "category"));
  return EscalationRequest{std::move(request_id), std::move(user), std::move(zone), std::move(category)};
}

json to_json(const EscalationResult& r) {
  return json{{"grouped", to_json(r.grouped)},
              {"granted_subscription", r.granted_subscription},
              {"failed_zones", r.failed_zones}};
}

EscalationResult escalation_result_from_json(const json& j) {
  EscalationResult out;
  out.grouped = grouped_from_json(require(j, "grouped"));
  const json& granted = require(j, "granted_subscription");
  if (!granted.is_boolean()) throw Error(ErrorCode::ParseError, "granted_subscription must be a boolean");
  out.granted_subscription = granted.get<bool>();
  out.failed_zones = require_string_array(j, "failed_zones");
  return out;
}

json to_json(const QueryResult& q) {
  json out{{"restaurants", to_json(q.restaurants)},
           {"served_by", to_string(q.served_by)},
           {"source_zone", q.source_zone}};
  if (q.served_by == ServedBy::escalated) {
    out["grouped"] = to_json(q.grouped);
    out["failed_zones"] = q.failed_zones;
    out["granted_subscription"] = q.granted_subscription;
  }
  return out;
}

json to_json(const std::set<ServiceCategory>& cats) {
  json arr = json::array();
  for (const auto& c : cats) arr.push_back(c.str());
  return arr;
}

std::set<ServiceCategory> categories_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of categories");
  std::set<ServiceCategory> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(ErrorCode::ParseError, "categories must be strings");
    out.insert(ServiceCategory::parse(e.get<std::string>()));
  }
  return out;
}

std::vector<BeaconObservation> observations_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "observations must be an array");
  std::vector<BeaconObservation> out;
  for (const auto& e : j) {
    out.push_back({GeoPoint{require_number(e, "bx"), require_number(e, "by")}, require_number(e, "d")});
  }
  return out;
}

json to_json(std::span<const BeaconObservation> obs) {
  json arr = json::array();
  for (const auto& o : obs) arr.push_back({{"bx", o.beacon.x}, {"by", o.beacon.y}, {"d", o.distance}});
  return arr;
}

json to_json(const Zone& z) {
  json polygon = json::array();
  for (const auto& v : z.polygon) polygon.push_back({v.x, v.y});
  return json{{"zone_id", z.zone_id}, {"display_name", z.display_name}, {"polygon", polygon}};
}

Zone zone_from_json(const json& j) {
  Zone z;
  z.zone_id = require_string(j, "zone_id");
  z.display_name = require_string(j, "display_name");
  const json& polygon = require(j, "polygon");
  if (!polygon.is_array()) throw Error(ErrorCode::ParseError, "polygon must be an array");
  for (const auto& v : polygon) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error(ErrorCode::ParseError, "polygon vertices must be [x, y] pairs");
    }
    z.polygon.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return z;
}

}  // namespace lbs::wire
