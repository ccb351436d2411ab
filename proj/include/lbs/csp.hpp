#pragma once

#include <lbs/domain.hpp>
#include <lbs/escalation.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace lbs {

/// Account operations the CSP needs from the LSP. Both throw UnknownUser.
class AccountDirectory {
 public:
  virtual ~AccountDirectory() = default;
  virtual std::set<ServiceCategory> subscriptions(const PhoneNumber& user) = 0;
  virtual std::set<ServiceCategory> subscribe(const PhoneNumber& user, const ServiceCategory& category) = 0;
};

/// Category lookup against one Cloud Unit endpoint. Any exception counts as
/// the unit being unreachable.
class CuGateway {
 public:
  virtual ~CuGateway() = default;
  virtual std::vector<Restaurant> search(const std::string& endpoint, const ServiceCategory& category,
                                         std::chrono::milliseconds timeout) = 0;
};

struct CspOptions {
  std::chrono::milliseconds heartbeat_interval{5000};
  int missed_beats_allowed = 3;
  std::chrono::milliseconds fanout_timeout{2000};
  bool grant_on_escalation = true;
  std::function<std::chrono::steady_clock::time_point()> clock = std::chrono::steady_clock::now;
};

/// Zone -> Cloud Unit endpoints, with liveness from heartbeats and
/// round-robin routing.
class CuDirectory {
 public:
  CuDirectory(const ZoneMap& zones, const CspOptions& options);

  /// Adds the endpoint or refreshes its heartbeat. Throws UnknownZone.
  void register_cu(const ZoneId& zone, const std::string& endpoint);

  /// Next live endpoint for `zone`, round-robin. Throws NoCuForZone.
  std::string route(const ZoneId& zone);

  /// Zones that have ever had a unit registered.
  std::vector<ZoneId> zones() const;
  std::vector<std::string> live_endpoints(const ZoneId& zone) const;
  bool empty() const;

 private:
  struct Endpoint {
    std::string address;
    std::chrono::steady_clock::time_point last_heartbeat;
  };
  struct Entry {
    std::vector<Endpoint> endpoints;
    std::size_t cursor = 0;
  };

  bool alive(const Endpoint& e, std::chrono::steady_clock::time_point now) const;

  const ZoneMap& zones_;
  const CspOptions& options_;
  mutable std::mutex mu_;
  std::map<ZoneId, Entry> entries_;
};

struct AuditRecord {
  std::string request_id;
  PhoneNumber user_id;
  ZoneId origin_zone;
  ServiceCategory category;
  Timestamp timestamp = 0;
};

/// Append-only escalation log keyed by request_id. When a path is given each
/// new record is also written as one JSON line.
class AuditLog {
 public:
  explicit AuditLog(std::optional<std::filesystem::path> path = std::nullopt);

  /// False, and nothing written, when the request_id is already logged.
  bool append(const AuditRecord& record);
  std::vector<AuditRecord> records() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<AuditRecord> records_;
  std::set<std::string> ids_;
  std::ofstream file_;
};

/// Cloud Service Provider: CU directory, escalation handling and the
/// cross-location category search.
class CloudServiceProvider {
 public:
  CloudServiceProvider(ZoneMap zones, std::shared_ptr<AccountDirectory> accounts,
                       std::shared_ptr<CuGateway> gateway, CspOptions options = {},
                       std::optional<std::filesystem::path> audit_path = std::nullopt);

  const ZoneMap& zones() const noexcept { return zones_; }
  CuDirectory& directory() noexcept { return directory_; }
  const AuditLog& audit() const noexcept { return audit_; }
  const CspOptions& options() const noexcept { return options_; }

  void register_cu(const ZoneId& zone, const std::string& endpoint) { directory_.register_cu(zone, endpoint); }
  std::string route(const ZoneId& zone) { return directory_.route(zone); }

  /// Search every zone, grant the subscription when configured, and log the
  /// request once. A repeated request_id is served again but not re-logged.
  /// Throws UnknownUser or UnknownZone; unreachable units show up in
  /// failed_zones rather than as an exception.
  EscalationResult handle_escalation(const EscalationRequest& request);

  /// Parallel fan-out to one unit per zone, each bounded by fanout_timeout.
  /// Empty groups are omitted.
  EscalationResult cross_location_search(const ServiceCategory& category);

 private:
  ZoneMap zones_;
  std::shared_ptr<AccountDirectory> accounts_;
  std::shared_ptr<CuGateway> gateway_;
  CspOptions options_;
  CuDirectory directory_;
  AuditLog audit_;
};

}  // namespace lbs
