#include <lbs/wire/files.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace lbs::wire {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<std::string> optional_string(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::ConfigError, "'" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

ZoneMap parse_zones(const json& j) {
  const json& zones = require(j, "zones");
  if (!zones.is_array()) throw Error(ErrorCode::ParseError, "'zones' must be an array");
  std::vector<Zone> parsed;
  for (const auto& z : zones) parsed.push_back(zone_from_json(z));
  std::map<std::string, ZoneId> tags;
  if (auto it = j.find("rfid_tags"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, "'rfid_tags' must be an object");
    for (const auto& [tag, zone] : it->items()) {
      if (!zone.is_string()) throw Error(ErrorCode::ParseError, "rfid tag '" + tag + "' must map to a string");
      tags.emplace(tag, zone.get<std::string>());
    }
  }
  return ZoneMap(std::move(parsed), std::move(tags));
}

ZoneMap load_zones(const std::filesystem::path& path) { return parse_zones(read_json_file(path)); }

json to_json(const ZoneMap& map) {
  json zones = json::array();
  for (const auto& z : map.zones()) zones.push_back(to_json(z));
  json tags = json::object();
  for (const auto& [tag, zone] : map.rfid_tags()) tags[tag] = zone;
  return json{{"zones", zones}, {"rfid_tags", tags}};
}

HostPort parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::ConfigError, "endpoint '" + std::string(text) + "' must be host:port");
  }
  int port = 0;
  const auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::ConfigError, "endpoint '" + std::string(text) + "' has a bad port");
  }
  return HostPort{std::string(text.substr(0, colon)), port};
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::lsp: return "lsp";
    case Role::cu: return "cu";
    case Role::csp: return "csp";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "lsp") return Role::lsp;
  if (text == "cu") return Role::cu;
  if (text == "csp") return Role::csp;
  throw Error(ErrorCode::ConfigError, "unknown role '" + std::string(text) + "'");
}

NodeConfig parse_node_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  if (j.value("v", 0) != 1) throw Error(ErrorCode::ConfigError, "config must declare \"v\": 1");
  NodeConfig cfg;
  try {
    cfg.role = parse_role(require_string(j, "role"));
    cfg.listen = parse_endpoint(require_string(j, "listen"));
    cfg.zones_file = resolve(base_dir, require_string(j, "zones_file"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (auto s = optional_string(j, "lsp_endpoint")) cfg.lsp_endpoint = parse_endpoint(*s);
  if (auto s = optional_string(j, "csp_endpoint")) cfg.csp_endpoint = parse_endpoint(*s);
  cfg.zone_id = optional_string(j, "zone_id");
  if (auto s = optional_string(j, "seed_file")) cfg.seed_file = resolve(base_dir, *s);
  if (auto s = optional_string(j, "audit_log")) cfg.audit_log = resolve(base_dir, *s);
  if (auto s = optional_string(j, "accounts_file")) cfg.accounts_file = resolve(base_dir, *s);
  if (auto it = j.find("grant_on_escalation"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ErrorCode::ConfigError, "'grant_on_escalation' must be a boolean");
    cfg.grant_on_escalation = it->get<bool>();
  }
  if (auto it = j.find("heartbeat_ms"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() <= 0) {
      throw Error(ErrorCode::ConfigError, "'heartbeat_ms' must be a positive integer");
    }
    cfg.heartbeat_interval = std::chrono::milliseconds(it->get<int>());
  }

  switch (cfg.role) {
    case Role::cu:
      if (!cfg.zone_id) throw Error(ErrorCode::ConfigError, "cu config needs zone_id");
      if (!cfg.lsp_endpoint) throw Error(ErrorCode::ConfigError, "cu config needs lsp_endpoint");
      if (!cfg.csp_endpoint) throw Error(ErrorCode::ConfigError, "cu config needs csp_endpoint");
      break;
    case Role::csp:
      if (!cfg.lsp_endpoint) throw Error(ErrorCode::ConfigError, "csp config needs lsp_endpoint");
      break;
    case Role::lsp:
      break;
  }
  return cfg;
}

NodeConfig load_node_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return parse_node_config(j, path.parent_path());
}

std::vector<UserAccount> load_accounts(const std::filesystem::path& path) {
  std::vector<UserAccount> out;
  if (!std::filesystem::exists(path)) return out;
  for_each_line(path, [&out](const json& j) {
    auto user = PhoneNumber::parse(require_string(j, "user_id"));
    auto hash = require_string(j, "credential_hash");
    auto subs = categories_from_json(require(j, "subscriptions"));
    const json& created = require(j, "created_at");
    if (!created.is_number_integer()) throw Error(ErrorCode::ParseError, "created_at must be an integer");
    out.push_back(UserAccount{std::move(user), std::move(hash), std::move(subs), created.get<Timestamp>()});
  });
  return out;
}

void save_accounts(const std::filesystem::path& path, const std::vector<UserAccount>& accounts) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
    for (const auto& a : accounts) {
      out << json{{"user_id", a.user_id.str()},
                  {"credential_hash", a.credential_hash},
                  {"subscriptions", to_json(a.subscriptions)},
                  {"created_at", a.created_at}}
                 .dump()
          << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<AuditRecord> load_audit(const std::filesystem::path& path) {
  std::vector<AuditRecord> out;
  for_each_line(path, [&out](const json& j) {
    const json& ts = require(j, "timestamp");
    if (!ts.is_number_integer()) throw Error(ErrorCode::ParseError, "timestamp must be an integer");
    out.push_back(AuditRecord{require_string(j, "request_id"), PhoneNumber::parse(require_string(j, "user_id")),
                              require_string(j, "origin_zone"),
                              ServiceCategory::parse(require_string(j, "category")), ts.get<Timestamp>()});
  });
  return out;
}

}  // namespace lbs::wire
