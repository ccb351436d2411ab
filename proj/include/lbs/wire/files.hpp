#pragma once

// On-disk formats: zones file, node config, persisted accounts and the CSP
// audit log.

#include <lbs/csp.hpp>
#include <lbs/domain.hpp>
#include <lbs/geolocation.hpp>
#include <lbs/wire/codec.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lbs::wire {

/// Reads a whole file as JSON. ConfigError if unreadable, ParseError if not JSON.
json read_json_file(const std::filesystem::path& path);

/// {zones:[{zone_id, display_name, polygon:[[x,y],...]}], rfid_tags:{tag: zone_id}}
ZoneMap parse_zones(const json& j);
ZoneMap load_zones(const std::filesystem::path& path);
json to_json(const ZoneMap& map);

struct HostPort {
  std::string host;
  int port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// "host:port"; ConfigError when malformed.
HostPort parse_endpoint(std::string_view text);

enum class Role { lsp, cu, csp };

std::string_view to_string(Role r) noexcept;
Role parse_role(std::string_view text);

/// {v:1, role, listen, lsp_endpoint?, csp_endpoint?, zone_id?, zones_file,
///  seed_file?, grant_on_escalation?, audit_log?, accounts_file?, heartbeat_ms?}
///
/// Relative paths resolve against the config file's directory.
struct NodeConfig {
  Role role = Role::lsp;
  HostPort listen;
  std::optional<HostPort> lsp_endpoint;
  std::optional<HostPort> csp_endpoint;
  std::optional<ZoneId> zone_id;
  std::filesystem::path zones_file;
  std::optional<std::filesystem::path> seed_file;
  bool grant_on_escalation = true;
  std::optional<std::filesystem::path> audit_log;
  std::optional<std::filesystem::path> accounts_file;
  std::chrono::milliseconds heartbeat_interval{5000};
};

NodeConfig parse_node_config(const json& j, const std::filesystem::path& base_dir);
NodeConfig load_node_config(const std::filesystem::path& path);

/// One account per line: {user_id, credential_hash, subscriptions[], created_at}.
std::vector<UserAccount> load_accounts(const std::filesystem::path& path);
void save_accounts(const std::filesystem::path& path, const std::vector<UserAccount>& accounts);

/// One escalation per line: {request_id, user_id, origin_zone, category, timestamp}.
std::vector<AuditRecord> load_audit(const std::filesystem::path& path);

}  // namespace lbs::wire
