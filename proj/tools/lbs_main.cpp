// lbs: run platform nodes, seed Cloud Units, act as a client, and replay
// scenarios against a live topology.

#include <lbs/wire/client.hpp>
#include <lbs/wire/harness.hpp>
#include <lbs/wire/http.hpp>
#include <lbs/wire/nodes.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

using lbs::wire::json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

int print_envelope(const json& envelope) {
  std::cout << envelope.dump(2) << std::endl;
  return envelope.value("status", "") == "ok" ? 0 : 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lbs::Error(lbs::ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "bx,by,d"
lbs::BeaconObservation parse_observation(const std::string& text) {
  std::istringstream in(text);
  lbs::BeaconObservation obs;
  char c1 = 0, c2 = 0;
  if (!(in >> obs.beacon.x >> c1 >> obs.beacon.y >> c2 >> obs.distance) || c1 != ',' || c2 != ',') {
    throw lbs::Error(lbs::ErrorCode::ParseError, "observation '" + text + "' must be bx,by,d");
  }
  return obs;
}

int report_transcript(const lbs::wire::Transcript& transcript, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << transcript.to_jsonl();
  } else {
    std::cout << transcript.to_jsonl();
  }
  if (transcript.ok()) {
    std::cerr << "scenario passed: " << transcript.steps.size() << " steps" << std::endl;
    return 0;
  }
  const auto& step = transcript.steps[*transcript.first_failure];
  std::cerr << "StepFailed: step " << step.index << " (" << step.actor << " " << step.action
            << "): " << step.mismatch << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-based restaurant information platform"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run one node (lsp, cu or csp)");
  std::string role, config_path;
  serve->add_option("role", role, "Node role")->required()->check(CLI::IsMember({"lsp", "cu", "csp"}));
  serve->add_option("--config", config_path, "Node config file")->required();

  // seed
  auto* seed = app.add_subcommand("seed", "Replace a Cloud Unit's restaurants from a seed file");
  std::string seed_cu, seed_file;
  seed->add_option("--cu", seed_cu, "Cloud Unit endpoint host:port")->required();
  seed->add_option("--file", seed_file, "Restaurants seed file (JSON lines)")->required();

  // client
  auto* client = app.add_subcommand("client", "Talk to a running topology");
  client->require_subcommand(1);
  std::string lsp_ep = "127.0.0.1:7100", csp_ep = "127.0.0.1:7101";
  client->add_option("--lsp", lsp_ep, "LSP endpoint")->capture_default_str();
  client->add_option("--csp", csp_ep, "CSP endpoint")->capture_default_str();

  std::string phone, password, user_id, token, cu_ep, category, restaurant_id, tag, zone;
  std::vector<std::string> prefs, observations;

  auto* c_register = client->add_subcommand("register", "Create an account");
  c_register->add_option("--phone", phone)->required();
  c_register->add_option("--password", password)->required();
  c_register->add_option("--pref", prefs, "Subscribed food style (repeatable)");

  auto* c_login = client->add_subcommand("login", "Authenticate and print a token");
  c_login->add_option("--user", user_id)->required();
  c_login->add_option("--password", password)->required();

  auto* c_locate = client->add_subcommand("locate", "Resolve a zone from an RFID tag or GPS ranges");
  auto* rfid_opt = c_locate->add_option("--rfid", tag, "RFID tag id");
  auto* gps_opt = c_locate->add_option("--gps", observations, "Beacon range bx,by,d (repeat >= 3 times)");
  rfid_opt->excludes(gps_opt);
  c_locate->add_option("--token", token, "Also record presence and look up the zone's Cloud Unit");

  auto* c_restaurants = client->add_subcommand("restaurants", "List the current zone's restaurants");
  c_restaurants->add_option("--cu", cu_ep)->required();
  c_restaurants->add_option("--token", token)->required();

  auto* c_query = client->add_subcommand("query", "Query a food style (escalates when unsubscribed)");
  c_query->add_option("--cu", cu_ep)->required();
  c_query->add_option("--token", token)->required();
  c_query->add_option("--category", category)->required();

  auto* c_info = client->add_subcommand("info", "Show one restaurant");
  c_info->add_option("--cu", cu_ep)->required();
  c_info->add_option("--token", token)->required();
  c_info->add_option("--id", restaurant_id)->required();

  auto* c_presence = client->add_subcommand("presence", "Count users located in a zone");
  c_presence->add_option("--zone", zone)->required();

  auto* c_route = client->add_subcommand("route", "Look up a zone's Cloud Unit");
  c_route->add_option("--zone", zone)->required();

  // scenario
  auto* scenario = app.add_subcommand("scenario", "Scripted journeys");
  scenario->require_subcommand(1);
  auto* scenario_run = scenario->add_subcommand("run", "Replay a scenario file against a live topology");
  std::string scenario_path, transcript_path;
  std::string scenario_lsp, scenario_csp;
  scenario_run->add_option("path", scenario_path)->required();
  scenario_run->add_option("--lsp", scenario_lsp, "Overrides the scenario's lsp endpoint");
  scenario_run->add_option("--csp", scenario_csp, "Overrides the scenario's csp endpoint");
  scenario_run->add_option("--transcript", transcript_path, "Write the transcript here instead of stdout");

  // demo
  auto* demo = app.add_subcommand("demo", "Local multi-node topology");
  demo->require_subcommand(1);
  auto* demo_up = demo->add_subcommand("up", "Boot 1 LSP + 1 CSP + one Cloud Unit per zone");
  std::string zones_path, seeds_dir, demo_scenario;
  int base_port = 7100;
  bool no_grant = false;
  demo_up->add_option("--zones", zones_path, "Zones file; <zone_id>.jsonl beside it seeds each zone")->required();
  demo_up->add_option("--seeds-dir", seeds_dir, "Directory holding <zone_id>.jsonl seed files");
  demo_up->add_option("--base-port", base_port, "LSP port; CSP and Cloud Units follow (0 = any free port)")
      ->capture_default_str();
  demo_up->add_option("--scenario", demo_scenario, "Run this scenario, then shut down");
  demo_up->add_option("--transcript", transcript_path, "Transcript output for --scenario");
  demo_up->add_flag("--no-grant", no_grant, "Serve escalations one-off instead of granting the subscription");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) {
      auto config = lbs::wire::load_node_config(config_path);
      if (lbs::wire::to_string(config.role) != role) {
        throw lbs::Error(lbs::ErrorCode::ConfigError, "config role is " + std::string(lbs::wire::to_string(config.role)));
      }
      auto node = lbs::wire::make_node(config);
      node->start(config.listen);
      std::cerr << role << " listening on " << node->endpoint().str() << std::endl;
      wait_for_signal();
      node->stop();
      return 0;
    }

    if (seed->parsed()) {
      const lbs::wire::Client c(lbs::wire::parse_endpoint(lsp_ep), lbs::wire::parse_endpoint(csp_ep));
      return print_envelope(c.ingest(lbs::wire::parse_endpoint(seed_cu), read_file(seed_file)));
    }

    if (client->parsed()) {
      const lbs::wire::Client c(lbs::wire::parse_endpoint(lsp_ep), lbs::wire::parse_endpoint(csp_ep));
      if (c_register->parsed()) return print_envelope(c.register_user(phone, password, prefs));
      if (c_login->parsed()) return print_envelope(c.login(user_id, password));
      if (c_locate->parsed()) {
        json env;
        if (!tag.empty()) {
          env = c.locate_rfid(tag);
        } else {
          std::vector<lbs::BeaconObservation> obs;
          for (const auto& o : observations) obs.push_back(parse_observation(o));
          env = c.locate_gps(obs);
        }
        if (env["status"] == "ok" && !token.empty()) {
          const std::string located = env["data"]["zone_id"];
          if (json p = c.record_presence(token, located); p["status"] != "ok") return print_envelope(p);
          if (json r = c.route(located); r["status"] == "ok") env["data"]["cu_endpoint"] = r["data"]["endpoint"];
        }
        return print_envelope(env);
      }
      const auto cu = cu_ep.empty() ? lbs::wire::HostPort{} : lbs::wire::parse_endpoint(cu_ep);
      if (c_restaurants->parsed()) return print_envelope(c.restaurants(cu, token));
      if (c_query->parsed()) return print_envelope(c.query(cu, token, category));
      if (c_info->parsed()) return print_envelope(c.info(cu, token, restaurant_id));
      if (c_presence->parsed()) return print_envelope(c.presence_count(zone));
      if (c_route->parsed()) return print_envelope(c.route(zone));
    }

    if (scenario_run->parsed()) {
      const auto s = lbs::wire::load_scenario(scenario_path);
      auto lsp = !scenario_lsp.empty() ? lbs::wire::parse_endpoint(scenario_lsp) : s.lsp;
      auto csp = !scenario_csp.empty() ? lbs::wire::parse_endpoint(scenario_csp) : s.csp;
      if (!lsp || !csp) throw lbs::Error(lbs::ErrorCode::ConfigError, "scenario needs lsp and csp endpoints");
      return report_transcript(lbs::wire::run_scenario(s, *lsp, *csp), transcript_path);
    }

    if (demo_up->parsed()) {
      auto options = lbs::wire::demo_topology(
          zones_path, seeds_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(seeds_dir));
      options.base_port = base_port;
      options.grant_on_escalation = !no_grant;
      lbs::wire::Topology topology(options);
      std::cerr << "lsp " << topology.lsp_endpoint().str() << "\ncsp " << topology.csp_endpoint().str() << "\n";
      for (const auto& [z, ep] : topology.cu_endpoints()) std::cerr << "cu  " << z << " " << ep.str() << "\n";
      if (!demo_scenario.empty()) {
        const auto s = lbs::wire::load_scenario(demo_scenario);
        return report_transcript(
            lbs::wire::run_scenario(s, topology.lsp_endpoint(), topology.csp_endpoint()), transcript_path);
      }
      std::cerr << "ready; Ctrl-C to stop" << std::endl;
      wait_for_signal();
      return 0;
    }
  } catch (const lbs::wire::TransportError& e) {
    std::cerr << "transport error: " << e.what() << std::endl;
    return 2;
  } catch (const lbs::Error& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  }
  return 0;
}
