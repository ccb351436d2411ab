#include <lbs/wire/harness.hpp>

#include <lbs/wire/http.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace lbs::wire {

TopologyOptions demo_topology(const std::filesystem::path& zones_file, std::optional<std::filesystem::path> seeds_dir) {
  TopologyOptions options;
  options.zones_file = zones_file;
  const auto dir = seeds_dir.value_or(zones_file.parent_path());
  const ZoneMap zones = load_zones(zones_file);
  for (const auto& zone : zones.zones()) {
    const auto seed = dir / (zone.zone_id + ".jsonl");
    if (std::filesystem::exists(seed)) options.seed_files.emplace(zone.zone_id, seed);
  }
  return options;
}

Topology::Topology(TopologyOptions options) : zones_(load_zones(options.zones_file)) {
  auto port_at = [&options](int offset) { return options.base_port == 0 ? 0 : options.base_port + offset; };

  LspOptions lsp_options;
  lsp_options.pbkdf2_iterations = options.pbkdf2_iterations;
  lsp_ = std::make_unique<LspNode>(zones_, lsp_options);
  lsp_->start(HostPort{options.host, port_at(0)});

  CspOptions csp_options;
  csp_options.grant_on_escalation = options.grant_on_escalation;
  csp_options.heartbeat_interval = options.heartbeat_interval;
  csp_ = std::make_unique<CspNode>(zones_, lsp_->endpoint(), csp_options, options.audit_log);
  csp_->start(HostPort{options.host, port_at(1)});

  int offset = 2;
  for (const auto& zone : zones_.zones()) {
    CuNodeOptions cu_options;
    cu_options.zone_id = zone.zone_id;
    cu_options.lsp = lsp_->endpoint();
    cu_options.csp = csp_->endpoint();
    cu_options.heartbeat_interval = options.heartbeat_interval;
    if (auto it = options.seed_files.find(zone.zone_id); it != options.seed_files.end()) {
      cu_options.seed_file = it->second;
    }
    auto node = std::make_unique<CuNode>(zones_, std::move(cu_options));
    node->start(HostPort{options.host, port_at(offset++)});
    cus_.emplace(zone.zone_id, std::move(node));
  }
}

Topology::~Topology() { stop(); }

void Topology::stop() {
  for (auto& [_, cu] : cus_) cu->stop();
  if (csp_) csp_->stop();
  if (lsp_) lsp_->stop();
}

std::map<ZoneId, HostPort> Topology::cu_endpoints() const {
  std::map<ZoneId, HostPort> out;
  for (const auto& [zone, cu] : cus_) out.emplace(zone, cu->endpoint());
  return out;
}

CuNode& Topology::cu(const ZoneId& zone) {
  auto it = cus_.find(zone);
  if (it == cus_.end()) throw Error(ErrorCode::UnknownZone, zone);
  return *it->second;
}

namespace {

const std::set<std::string, std::less<>> kActions{"register", "login", "locate", "list", "query", "detail"};

struct Actor {
  std::optional<std::string> user_id;
  std::optional<std::string> password;
  std::optional<std::string> token;
  std::optional<HostPort> cu;
};

std::string arg_string(const json& args, std::string_view key, const std::optional<std::string>& fallback) {
  if (auto it = args.find(key); it != args.end() && it->is_string()) return it->get<std::string>();
  if (fallback) return *fallback;
  throw Error(ErrorCode::ParseError, "step needs '" + std::string(key) + "'");
}

json run_step(const Client& client, Actor& actor, const ScenarioStep& step) {
  const json& args = step.args;
  if (step.action == "register") {
    std::vector<std::string> prefs;
    if (args.contains("preferences")) prefs = require_string_array(args, "preferences");
    const std::string password = require_string(args, "password");
    json env = client.register_user(require_string(args, "phone"), password, prefs);
    if (env["status"] == "ok") {
      actor.user_id = env["data"]["user_id"].get<std::string>();
      actor.password = password;
    }
    return env;
  }
  if (step.action == "login") {
    json env = client.login(arg_string(args, "user_id", actor.user_id), arg_string(args, "password", actor.password));
    if (env["status"] == "ok") actor.token = env["data"]["token"].get<std::string>();
    return env;
  }
  if (step.action == "locate") {
    const std::string method = require_string(args, "method");
    json env = method == "rfid" ? client.locate_rfid(require_string(args, "tag"))
                                : client.locate_gps(observations_from_json(require(args, "observations")));
    if (env["status"] != "ok" || !actor.token) return env;
    const ZoneId zone = env["data"]["zone_id"].get<std::string>();
    if (json presence = client.record_presence(*actor.token, zone); presence["status"] != "ok") return presence;
    json routed = client.route(zone);
    if (routed["status"] != "ok") return routed;
    actor.cu = parse_endpoint(routed["data"]["endpoint"].get<std::string>());
    return env;
  }
  // The remaining actions talk to the actor's Cloud Unit.
  if (!actor.token) return error_envelope(ErrorCode::InvalidToken);
  if (!actor.cu) return error_envelope(ErrorCode::WrongZone);
  if (step.action == "list") return client.restaurants(*actor.cu, *actor.token);
  if (step.action == "query") return client.query(*actor.cu, *actor.token, require_string(args, "category"));
  return client.info(*actor.cu, *actor.token, require_string(args, "restaurant_id"));
}

void strip_tokens(json& j) {
  if (j.is_object()) {
    for (auto& [key, value] : j.items()) {
      if (key == "token" && value.is_string()) {
        value = "<token>";
      } else {
        strip_tokens(value);
      }
    }
  } else if (j.is_array()) {
    for (auto& e : j) strip_tokens(e);
  }
}

json record_to_json(const StepRecord& r) {
  json j{{"index", r.index},       {"actor", r.actor},     {"action", r.action},
         {"request", r.request},   {"response", r.response}, {"latency_ms", r.latency_ms},
         {"matched", r.matched}};
  j["served_by"] = r.served_by ? json(*r.served_by) : json(nullptr);
  if (!r.matched) j["mismatch"] = r.mismatch;
  return j;
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "scenario must be a JSON object");
  if (j.value("v", 0) != 1) throw Error(ErrorCode::ParseError, "scenario must declare \"v\": 1");
  Scenario s;
  if (auto it = j.find("lsp"); it != j.end() && it->is_string()) s.lsp = parse_endpoint(it->get<std::string>());
  if (auto it = j.find("csp"); it != j.end() && it->is_string()) s.csp = parse_endpoint(it->get<std::string>());
  const json& steps = require(j, "steps");
  if (!steps.is_array()) throw Error(ErrorCode::ParseError, "'steps' must be an array");
  for (const auto& e : steps) {
    ScenarioStep step;
    step.actor = require_string(e, "actor");
    step.action = require_string(e, "action");
    if (!kActions.contains(step.action)) throw Error(ErrorCode::ParseError, "unknown action '" + step.action + "'");
    if (auto it = e.find("args"); it != e.end()) {
      if (!it->is_object()) throw Error(ErrorCode::ParseError, "'args' must be an object");
      step.args = *it;
    }
    if (auto it = e.find("expect"); it != e.end()) step.expect = *it;
    s.steps.push_back(std::move(step));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

json to_json(const Scenario& s) {
  json steps = json::array();
  for (const auto& step : s.steps) {
    json e{{"actor", step.actor}, {"action", step.action}, {"args", step.args}};
    if (step.expect) e["expect"] = *step.expect;
    steps.push_back(std::move(e));
  }
  json out{{"v", 1}, {"steps", steps}};
  if (s.lsp) out["lsp"] = s.lsp->str();
  if (s.csp) out["csp"] = s.csp->str();
  return out;
}

bool envelope_matches(const json& expected, const json& actual, std::string* why) {
  auto fail = [why](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (expected.is_object()) {
    if (!actual.is_object()) return fail("expected an object");
    for (const auto& [key, value] : expected.items()) {
      auto it = actual.find(key);
      if (it == actual.end()) return fail("missing '" + key + "'");
      std::string inner;
      if (!envelope_matches(value, *it, &inner)) return fail(key + (inner.empty() ? "" : "." + inner));
    }
    return true;
  }
  if (expected.is_array()) {
    if (!actual.is_array() || actual.size() != expected.size()) return fail("array length differs");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      std::string inner;
      if (!envelope_matches(expected[i], actual[i], &inner)) return fail("[" + std::to_string(i) + "]" + inner);
    }
    return true;
  }
  if (expected.is_number() && actual.is_number()) {
    if (std::abs(expected.get<double>() - actual.get<double>()) <= 1e-6) return true;
    return fail("expected " + expected.dump() + ", got " + actual.dump());
  }
  if (expected == actual) return true;
  return fail("expected " + expected.dump() + ", got " + actual.dump());
}

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  for (const auto& r : steps) out << record_to_json(r).dump() << '\n';
  return out.str();
}

json Transcript::normalized() const {
  json out = json::array();
  for (const auto& r : steps) {
    json j = record_to_json(r);
    j.erase("latency_ms");
    strip_tokens(j);
    out.push_back(std::move(j));
  }
  return out;
}

Transcript run_scenario(const Scenario& scenario, const HostPort& lsp, const HostPort& csp) {
  const Client client(lsp, csp);
  std::map<std::string, Actor> actors;
  Transcript transcript;
  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const ScenarioStep& step = scenario.steps[i];
    StepRecord record;
    record.index = i;
    record.actor = step.actor;
    record.action = step.action;
    record.request = step.args;

    const auto started = std::chrono::steady_clock::now();
    try {
      record.response = run_step(client, actors[step.actor], step);
    } catch (const TransportError& e) {
      record.response = json{{"transport_error", e.what()}};
    } catch (const Error& e) {
      record.response = error_envelope(e.code());
    }
    record.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    if (const json* data = record.response.contains("data") ? &record.response["data"] : nullptr;
        data && data->is_object() && data->contains("served_by")) {
      record.served_by = (*data)["served_by"].get<std::string>();
    }
    const json expected = step.expect.value_or(json{{"status", "ok"}});
    record.matched = envelope_matches(expected, record.response, &record.mismatch);
    if (!record.matched && !transcript.first_failure) transcript.first_failure = i;
    transcript.steps.push_back(std::move(record));
  }
  return transcript;
}

}  // namespace lbs::wire
