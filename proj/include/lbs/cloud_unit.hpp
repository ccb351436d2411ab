#pragma once

#include <lbs/domain.hpp>
#include <lbs/escalation.hpp>

#include <chrono>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace lbs {

/// What a Cloud Unit learns about a bearer token from the LSP.
struct TokenInfo {
  PhoneNumber user_id;
  std::set<ServiceCategory> subscriptions;
  std::optional<ZoneId> current_zone;
};

/// Token introspection backend. Throws Error(InvalidToken) for bad tokens.
class TokenValidator {
 public:
  virtual ~TokenValidator() = default;
  virtual TokenInfo introspect(std::string_view token) = 0;
};

/// Route to the CSP. Throws Error(CspUnreachable) when the CSP cannot be
/// contacted; other CSP-side errors propagate with their own code.
class EscalationChannel {
 public:
  virtual ~EscalationChannel() = default;
  virtual EscalationResult escalate(const EscalationRequest& request) = 0;
};

/// Restaurant records of one zone with a category index.
///
/// Readers never observe a partially applied replace().
class RestaurantStore {
 public:
  void replace(std::vector<Restaurant> records);

  /// Sorted by restaurant_id.
  std::vector<Restaurant> all() const;
  std::vector<Restaurant> by_category(const ServiceCategory& category) const;
  std::optional<Restaurant> find(std::string_view restaurant_id) const;
  std::set<ServiceCategory> categories() const;
  std::size_t size() const;

  /// Rebuilds the category index from scratch and compares it with the
  /// maintained one.
  bool index_consistent() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, Restaurant, std::less<>> by_id_;
  std::map<ServiceCategory, std::vector<std::string>> by_category_;
};

struct IngestRejection {
  std::size_t line = 0;  // 1-based line in the seed file
  ErrorCode code = ErrorCode::InvalidField;
  std::string detail;
};

struct IngestReport {
  std::size_t loaded = 0;
  std::vector<IngestRejection> rejected;
};

enum class ServedBy { local, escalated };

std::string_view to_string(ServedBy s) noexcept;

struct QueryResult {
  std::vector<Restaurant> restaurants;
  ServedBy served_by = ServedBy::local;
  ZoneId source_zone;
  // Escalated only.
  GroupedRestaurants grouped;
  std::vector<ZoneId> failed_zones;
  bool granted_subscription = false;
};

struct CuOptions {
  /// How long an LSP introspection result is reused.
  std::chrono::milliseconds validation_ttl{2000};
  std::function<std::chrono::steady_clock::time_point()> clock = std::chrono::steady_clock::now;
  std::function<std::string()> request_id_source;
};

/// A per-zone Cloud Unit: serves its zone's restaurants to subscribed users
/// and forwards unsubscribed category requests to the CSP.
class CloudUnit {
 public:
  CloudUnit(ZoneId zone_id, ZoneMap zones, std::shared_ptr<TokenValidator> validator,
            std::shared_ptr<EscalationChannel> csp, CuOptions options = {});

  const ZoneId& zone_id() const noexcept { return zone_id_; }
  const RestaurantStore& store() const noexcept { return store_; }

  /// Replaces the store with the valid records of a restaurants seed stream.
  /// Malformed lines abort the whole ingest with ParseError (store untouched);
  /// records failing validation are skipped and reported.
  IngestReport ingest_restaurants(std::istream& seed);
  IngestReport ingest_restaurants(std::vector<Restaurant> records);

  /// All records, sorted. Throws WrongZone unless `zone` is this CU's zone.
  std::vector<Restaurant> list_restaurants(const ZoneId& zone) const;

  /// Same as list_restaurants for the token's current zone.
  std::vector<Restaurant> list_for(std::string_view token);

  QueryResult handle_query(std::string_view token, std::string_view category);

  /// Throws NotFound, or NotAuthorized when the user lacks the record's category.
  Restaurant get_restaurant_info(std::string_view token, std::string_view restaurant_id);

  /// Unauthenticated category lookup used by the CSP fan-out.
  std::vector<Restaurant> local_search(const ServiceCategory& category) const;

  /// Forget any cached validation for `token`.
  void invalidate(std::string_view token);

 private:
  TokenInfo validate(std::string_view token);
  TokenInfo validate_in_zone(std::string_view token);

  struct NumberedRecord {
    std::size_t line;
    Restaurant record;
  };
  IngestReport apply_ingest(std::vector<NumberedRecord> records, IngestReport report);

  struct CachedValidation {
    TokenInfo info;
    std::chrono::steady_clock::time_point fetched;
  };

  ZoneId zone_id_;
  ZoneMap zones_;
  std::shared_ptr<TokenValidator> validator_;
  std::shared_ptr<EscalationChannel> csp_;
  CuOptions options_;
  RestaurantStore store_;
  std::mutex ingest_mu_;

  std::mutex cache_mu_;
  std::map<std::string, CachedValidation, std::less<>> cache_;
};

}  // namespace lbs
