#pragma once

#include <lbs/error.hpp>
#include <lbs/geolocation.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace lbs {

/// UTC seconds since the epoch.
using Timestamp = std::int64_t;

Timestamp now_utc() noexcept;

/// Canonical phone number: 7 to 15 decimal digits, no separators.
class PhoneNumber {
 public:
  /// Strips a leading "+", spaces and hyphens. Throws Error(InvalidPhone).
  static PhoneNumber parse(std::string_view raw);

  const std::string& str() const noexcept { return digits_; }

  friend auto operator<=>(const PhoneNumber&, const PhoneNumber&) = default;

 private:
  explicit PhoneNumber(std::string digits) : digits_(std::move(digits)) {}
  std::string digits_;
};

inline PhoneNumber canonicalize_phone(std::string_view raw) { return PhoneNumber::parse(raw); }

/// A food style tag such as "indian"; doubles as the unit of subscription.
/// Matches [a-z0-9_-]{1,32} after lowercasing.
class ServiceCategory {
 public:
  /// Throws Error(InvalidField).
  static ServiceCategory parse(std::string_view raw);

  const std::string& str() const noexcept { return name_; }

  friend auto operator<=>(const ServiceCategory&, const ServiceCategory&) = default;

 private:
  explicit ServiceCategory(std::string name) : name_(std::move(name)) {}
  std::string name_;
};

struct UserAccount {
  PhoneNumber user_id;
  std::string credential_hash;
  std::set<ServiceCategory> subscriptions;
  Timestamp created_at = 0;
};

struct Restaurant {
  std::string restaurant_id;
  std::string name;
  std::string address;
  PhoneNumber contact;
  ServiceCategory food_style;
  GeoPoint position;
  ZoneId zone_id;
};

bool operator==(const Restaurant& a, const Restaurant& b);

struct AuthToken {
  std::string token;  // 64 lowercase hex characters
  PhoneNumber user_id;
  Timestamp issued_at = 0;
  std::optional<ZoneId> current_zone;
};

/// Returns the record unchanged when it is well formed for `zones`.
/// Throws InvalidField for empty id/name/address, UnknownZone when zone_id is
/// not in the map, and ZoneMismatch when the position is outside the zone.
const Restaurant& validate_restaurant(const Restaurant& record, const ZoneMap& zones);

}  // namespace lbs
