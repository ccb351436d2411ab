#pragma once

#include <lbs/domain.hpp>

#include <map>
#include <string>
#include <vector>

namespace lbs {

/// A Cloud Unit asking the CSP to serve a category the user is not
/// subscribed to.
struct EscalationRequest {
  std::string request_id;
  PhoneNumber user_id;
  ZoneId origin_zone;
  ServiceCategory category;
};

/// Restaurants grouped by zone, each group sorted by restaurant_id.
using GroupedRestaurants = std::map<ZoneId, std::vector<Restaurant>>;

struct EscalationResult {
  GroupedRestaurants grouped;
  bool granted_subscription = false;
  /// Zones whose Cloud Unit could not be reached. Non-empty means the result
  /// is partial.
  std::vector<ZoneId> failed_zones;

  bool partial() const noexcept { return !failed_zones.empty(); }
};

}  // namespace lbs
