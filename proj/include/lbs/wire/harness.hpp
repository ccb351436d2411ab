#pragma once

// Multi-node harness: boots an LSP, a CSP and one Cloud Unit per zone in this
// process, and replays scripted user journeys against them.

#include <lbs/wire/client.hpp>
#include <lbs/wire/files.hpp>
#include <lbs/wire/nodes.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lbs::wire {

struct TopologyOptions {
  std::filesystem::path zones_file;
  /// Zones without a seed file start with an empty store.
  std::map<ZoneId, std::filesystem::path> seed_files;
  std::string host = "127.0.0.1";
  /// 0 picks free ports. Otherwise LSP = base, CSP = base + 1, and Cloud
  /// Units take base + 2, base + 3, ... in zone_id order.
  int base_port = 0;
  bool grant_on_escalation = true;
  std::chrono::milliseconds heartbeat_interval{5000};
  std::optional<std::filesystem::path> audit_log;
  int pbkdf2_iterations = 20000;
};

/// The demo layout: `<dir>/<zone_id>.jsonl` next to the zones file (or in
/// `seeds_dir`) seeds each zone.
TopologyOptions demo_topology(const std::filesystem::path& zones_file,
                              std::optional<std::filesystem::path> seeds_dir = std::nullopt);

class Topology {
 public:
  /// Starts LSP, CSP, then every Cloud Unit. Throws BindError / ConfigError.
  explicit Topology(TopologyOptions options);
  ~Topology();

  const ZoneMap& zones() const noexcept { return zones_; }
  HostPort lsp_endpoint() const { return lsp_->endpoint(); }
  HostPort csp_endpoint() const { return csp_->endpoint(); }
  std::map<ZoneId, HostPort> cu_endpoints() const;

  LspNode& lsp() noexcept { return *lsp_; }
  CspNode& csp() noexcept { return *csp_; }
  CuNode& cu(const ZoneId& zone);

  Client client() const { return Client(lsp_endpoint(), csp_endpoint()); }

  void stop();

 private:
  ZoneMap zones_;
  std::unique_ptr<LspNode> lsp_;
  std::unique_ptr<CspNode> csp_;
  std::map<ZoneId, std::unique_ptr<CuNode>> cus_;
};

struct ScenarioStep {
  std::string actor;
  std::string action;  // register | login | locate | list | query | detail
  json args = json::object();
  /// Expected envelope, matched as a subset. Defaults to {"status":"ok"}.
  std::optional<json> expect;
};

/// {v:1, lsp?, csp?, steps:[{actor, action, args?, expect?}]}
struct Scenario {
  std::optional<HostPort> lsp;
  std::optional<HostPort> csp;
  std::vector<ScenarioStep> steps;
};

Scenario parse_scenario(const json& j);
Scenario load_scenario(const std::filesystem::path& path);
json to_json(const Scenario& s);

struct StepRecord {
  std::size_t index = 0;
  std::string actor;
  std::string action;
  json request;
  json response;
  double latency_ms = 0.0;
  std::optional<std::string> served_by;
  bool matched = true;
  std::string mismatch;
};

struct Transcript {
  std::vector<StepRecord> steps;
  std::optional<std::size_t> first_failure;

  bool ok() const noexcept { return !first_failure.has_value(); }
  /// One JSON object per step.
  std::string to_jsonl() const;
  /// Same records without latency and token values, for run-to-run comparison.
  json normalized() const;
};

/// True when every field present in `expected` matches `actual`; numbers
/// compare within 1e-6. On mismatch `why` names the first differing path.
bool envelope_matches(const json& expected, const json& actual, std::string* why = nullptr);

/// Runs the steps in order, recording every one. The transcript's
/// first_failure is the index of the first step whose envelope did not match.
Transcript run_scenario(const Scenario& scenario, const HostPort& lsp, const HostPort& csp);

}  // namespace lbs::wire
