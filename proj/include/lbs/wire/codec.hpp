#pragma once

// JSON shapes shared by the HTTP surface and the on-disk formats.

#include <lbs/cloud_unit.hpp>
#include <lbs/domain.hpp>
#include <lbs/escalation.hpp>
#include <lbs/geolocation.hpp>

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace lbs::wire {

using json = nlohmann::json;

inline constexpr std::string_view kOkMessage = "OK";
inline constexpr std::string_view kAuthenticatedMessage = "Authenticated User";
inline constexpr std::string_view kAuthFailedMessage = "Authentication Failed";

/// {"status":"ok","message":..,"data":..}
json ok_envelope(json data, std::string_view message = kOkMessage);
/// {"status":"error","message":<code text>}; AuthFailed uses the login text.
json error_envelope(ErrorCode code);
/// Error code carried by an error envelope, if it is one we know.
std::optional<ErrorCode> envelope_error(const json& envelope);
bool is_envelope(const json& body);

// Field access that raises ParseError on missing or mistyped fields.
const json& require(const json& obj, std::string_view key);
std::string require_string(const json& obj, std::string_view key);
double require_number(const json& obj, std::string_view key);
std::vector<std::string> require_string_array(const json& obj, std::string_view key);

/// Seed-file / wire record: {restaurant_id, name, address, contact, food_style, x, y, zone_id}.
json to_json(const Restaurant& r);
/// ParseError for structural problems; InvalidPhone / InvalidField for bad values.
Restaurant restaurant_from_json(const json& j);
json to_json(const std::vector<Restaurant>& rs);
std::vector<Restaurant> restaurants_from_json(const json& j);

json to_json(const GroupedRestaurants& g);
GroupedRestaurants grouped_from_json(const json& j);

json to_json(const EscalationRequest& r);
EscalationRequest escalation_request_from_json(const json& j);
json to_json(const EscalationResult& r);
EscalationResult escalation_result_from_json(const json& j);

json to_json(const QueryResult& q);

json to_json(const std::set<ServiceCategory>& cats);
std::set<ServiceCategory> categories_from_json(const json& j);

/// [{bx, by, d}, ...]
std::vector<BeaconObservation> observations_from_json(const json& j);
json to_json(std::span<const BeaconObservation> obs);

json to_json(const Zone& z);
Zone zone_from_json(const json& j);

}  // namespace lbs::wire
