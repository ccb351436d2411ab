#include <lbs/wire/nodes.hpp>

#include <lbs/wire/http.hpp>

#include <httplib.h>
#include <sys/socket.h>

#include <fstream>
#include <sstream>

namespace lbs::wire {

namespace {

using Request = httplib::Request;
using Response = httplib::Response;

void send(Response& res, int status, const json& envelope) {
  res.status = status;
  res.set_content(envelope.dump(), "application/json");
}

// Runs `f` and turns whatever it throws into an error envelope.
template <typename F>
auto guarded(F f) {
  return [f = std::move(f)](const Request& req, Response& res) {
    try {
      send(res, 200, f(req));
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_envelope(e.code()));
    } catch (const json::exception&) {
      send(res, 400, error_envelope(ErrorCode::ParseError));
    } catch (const std::exception&) {
      send(res, 500, error_envelope(ErrorCode::InternalError));
    }
  };
}

json body_of(const Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::ParseError, "request body is not JSON");
  }
  if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be an object");
  return body;
}

std::string bearer_of(const Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) {
    throw Error(ErrorCode::InvalidToken, "missing bearer token");
  }
  return header.substr(prefix.size());
}

json health(bool ok) { return ok_envelope(json{{"status", ok ? "ok" : "degraded"}}); }

json zone_or_null(const std::optional<ZoneId>& zone) { return zone ? json(*zone) : json(nullptr); }

// Only SO_REUSEADDR: httplib's default SO_REUSEPORT would let two nodes share
// a port silently.
void reuse_addr_only(socket_t sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
}

}  // namespace

HttpNode::HttpNode() : server_(std::make_unique<httplib::Server>()) {
  server_->set_socket_options(reuse_addr_only);
  server_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  server_->set_read_timeout(5, 0);
  server_->set_write_timeout(5, 0);
  // Unrouted paths still answer with an envelope.
  server_->set_error_handler([](const Request&, Response& res) {
    if (res.body.empty()) res.set_content(error_envelope(ErrorCode::NotFound).dump(), "application/json");
  });
}

HttpNode::~HttpNode() { stop(); }

void HttpNode::start(const HostPort& listen) {
  if (running_) return;
  server().Get("/healthz", guarded([](const Request&) { return health(true); }));
  int port = listen.port;
  if (port == 0) {
    port = server_->bind_to_any_port(listen.host);
    if (port < 0) throw Error(ErrorCode::BindError, listen.str());
  } else if (!server_->bind_to_port(listen.host, port)) {
    throw Error(ErrorCode::BindError, listen.str());
  }
  bound_ = HostPort{listen.host == "0.0.0.0" ? "127.0.0.1" : listen.host, port};
  running_ = true;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  on_started();
}

void HttpNode::stop() {
  if (!running_.exchange(false)) return;
  on_stopping();
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

LspNode::LspNode(ZoneMap zones, LspOptions options, std::optional<std::filesystem::path> accounts_file)
    : lsp_(std::move(zones), options), accounts_file_(std::move(accounts_file)) {
  if (accounts_file_) {
    for (auto& account : load_accounts(*accounts_file_)) lsp_.restore(std::move(account));
  }
  auto& s = server();

  s.Post("/lsp/register", guarded([this](const Request& req) {
           const json body = body_of(req);
           std::vector<std::string> prefs;
           if (body.contains("preferences")) prefs = require_string_array(body, "preferences");
           const PhoneNumber user =
               lsp_.register_user(require_string(body, "phone"), require_string(body, "password"), prefs);
           persist();
           return ok_envelope(json{{"user_id", user.str()}});
         }));

  s.Post("/lsp/login", guarded([this](const Request& req) {
           const json body = body_of(req);
           const AuthToken token = lsp_.authenticate(require_string(body, "user_id"), require_string(body, "password"));
           return ok_envelope(json{{"token", token.token}, {"user_id", token.user_id.str()}}, kAuthenticatedMessage);
         }));

  s.Post("/lsp/logout", guarded([this](const Request& req) {
           lsp_.logout(require_string(body_of(req), "token"));
           return ok_envelope(json::object());
         }));

  s.Post("/lsp/introspect", guarded([this](const Request& req) {
           const AuthToken token = lsp_.introspect(require_string(body_of(req), "token"));
           return ok_envelope(json{{"user_id", token.user_id.str()},
                                   {"subscriptions", to_json(lsp_.subscriptions(token.user_id))},
                                   {"current_zone", zone_or_null(token.current_zone)}});
         }));

  s.Post("/lsp/subscribe", guarded([this](const Request& req) {
           const json body = body_of(req);
           const auto subs = lsp_.subscribe(PhoneNumber::parse(require_string(body, "user_id")),
                                            ServiceCategory::parse(require_string(body, "category")));
           persist();
           return ok_envelope(json{{"subscriptions", to_json(subs)}});
         }));

  s.Get(R"(/lsp/users/([^/]+))", guarded([this](const Request& req) {
          const PhoneNumber user = PhoneNumber::parse(req.matches[1].str());
          return ok_envelope(json{{"user_id", user.str()}, {"subscriptions", to_json(lsp_.subscriptions(user))}});
        }));

  s.Post("/lsp/presence", guarded([this](const Request& req) {
           const json body = body_of(req);
           lsp_.record_presence(require_string(body, "token"), require_string(body, "zone_id"));
           return ok_envelope(json::object());
         }));

  s.Get(R"(/lsp/presence/([^/]+))", guarded([this](const Request& req) {
          return ok_envelope(json{{"count", lsp_.count_users(req.matches[1].str())}});
        }));

  s.Post("/lsp/services", guarded([this](const Request& req) {
           const json body = body_of(req);
           const AuthToken token = lsp_.introspect(require_string(body, "token"));
           const auto offered = categories_from_json(require(body, "offered"));
           const ZoneId zone = token.current_zone.value_or("");
           json services = json::array();
           for (const auto& c : lsp_.list_available_services(token.user_id, zone, offered)) services.push_back(c.str());
           return ok_envelope(json{{"services", services}});
         }));

  s.Post("/locate", guarded([this](const Request& req) {
           const json body = body_of(req);
           const std::string method = require_string(body, "method");
           if (method == "rfid") {
             const ZoneId zone = resolve_rfid(require_string(body, "tag"), lsp_.zones());
             return ok_envelope(json{{"zone_id", zone},
                                     {"display_name", lsp_.zones().at(zone).display_name},
                                     {"x", nullptr},
                                     {"y", nullptr}});
           }
           if (method == "gps") {
             const auto obs = observations_from_json(require(body, "observations"));
             const ResolvedLocation loc = resolve_gps(obs, lsp_.zones());
             return ok_envelope(json{{"zone_id", loc.zone_id},
                                     {"display_name", lsp_.zones().at(loc.zone_id).display_name},
                                     {"x", loc.point.x},
                                     {"y", loc.point.y},
                                     {"rms_residual", loc.rms_residual}});
           }
           throw Error(ErrorCode::InvalidField, "method must be 'gps' or 'rfid'");
         }));
}

void LspNode::persist() {
  if (!accounts_file_) return;
  std::lock_guard lock(persist_mu_);
  save_accounts(*accounts_file_, lsp_.accounts());
}

CspNode::CspNode(ZoneMap zones, HostPort lsp, CspOptions options, std::optional<std::filesystem::path> audit_log)
    : csp_(std::move(zones), std::make_shared<HttpAccountDirectory>(std::move(lsp)),
           std::make_shared<HttpCuGateway>(), std::move(options), std::move(audit_log)) {
  auto& s = server();

  s.Post("/csp/register_cu", guarded([this](const Request& req) {
           const json body = body_of(req);
           const std::string endpoint = require_string(body, "endpoint");
           parse_endpoint(endpoint);
           csp_.register_cu(require_string(body, "zone_id"), endpoint);
           return ok_envelope(json::object());
         }));

  s.Get(R"(/csp/route/([^/]+))", guarded([this](const Request& req) {
          return ok_envelope(json{{"endpoint", csp_.route(req.matches[1].str())}});
        }));

  s.Post("/csp/escalate", guarded([this](const Request& req) {
           const EscalationResult result = csp_.handle_escalation(escalation_request_from_json(body_of(req)));
           return ok_envelope(to_json(result), result.partial() ? to_string(ErrorCode::PartialResult) : kOkMessage);
         }));

  s.Get("/csp/audit", guarded([this](const Request&) {
          json records = json::array();
          for (const auto& r : csp_.audit().records()) {
            records.push_back(json{{"request_id", r.request_id},
                                   {"user_id", r.user_id.str()},
                                   {"origin_zone", r.origin_zone},
                                   {"category", r.category.str()},
                                   {"timestamp", r.timestamp}});
          }
          return ok_envelope(json{{"records", records}});
        }));
}

CuNode::CuNode(ZoneMap zones, CuNodeOptions options)
    : options_(std::move(options)),
      unit_(options_.zone_id, std::move(zones), std::make_shared<HttpTokenValidator>(options_.lsp),
            std::make_shared<HttpEscalationChannel>(options_.csp), options_.unit) {
  if (options_.seed_file) {
    std::ifstream in(*options_.seed_file);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + options_.seed_file->string());
    unit_.ingest_restaurants(in);
  }
  auto& s = server();

  s.Get("/healthz", guarded([this](const Request&) { return health(registered_); }));

  s.Get("/cu/restaurants", guarded([this](const Request& req) {
          return ok_envelope(json{{"restaurants", to_json(unit_.list_for(bearer_of(req)))}});
        }));

  s.Get(R"(/cu/restaurants/([^/]+))", guarded([this](const Request& req) {
          return ok_envelope(json{{"restaurant", to_json(unit_.get_restaurant_info(bearer_of(req), req.matches[1].str()))}});
        }));

  s.Post("/cu/query", guarded([this](const Request& req) {
           const std::string token = bearer_of(req);
           const QueryResult result = unit_.handle_query(token, require_string(body_of(req), "category"));
           const bool partial = !result.failed_zones.empty();
           return ok_envelope(to_json(result), partial ? to_string(ErrorCode::PartialResult) : kOkMessage);
         }));

  s.Get("/cu/internal/search", guarded([this](const Request& req) {
          if (!req.has_param("category")) throw Error(ErrorCode::ParseError, "missing category parameter");
          const auto category = ServiceCategory::parse(req.get_param_value("category"));
          return ok_envelope(json{{"zone_id", unit_.zone_id()}, {"restaurants", to_json(unit_.local_search(category))}});
        }));

  s.Get("/cu/categories", guarded([this](const Request&) {
          return ok_envelope(json{{"zone_id", unit_.zone_id()}, {"categories", to_json(unit_.store().categories())}});
        }));

  s.Post("/cu/ingest", guarded([this](const Request& req) {
           std::istringstream in(req.body);
           const IngestReport report = unit_.ingest_restaurants(in);
           json rejected = json::array();
           for (const auto& r : report.rejected) {
             rejected.push_back(json{{"line", r.line}, {"code", to_string(r.code)}, {"detail", r.detail}});
           }
           return ok_envelope(json{{"loaded", report.loaded}, {"rejected", rejected}});
         }));
}

CuNode::~CuNode() { stop(); }

bool CuNode::register_with_csp() {
  try {
    unwrap(call(options_.csp, "POST", "/csp/register_cu",
                json{{"zone_id", options_.zone_id}, {"endpoint", endpoint().str()}},
                CallOptions{std::nullopt, std::chrono::milliseconds(2000)}));
    registered_ = true;
  } catch (const std::exception&) {
    registered_ = false;
  }
  return registered_;
}

void CuNode::on_started() {
  {
    std::lock_guard lock(hb_mu_);
    hb_stop_ = false;
  }
  register_with_csp();
  heartbeat_ = std::thread([this] { heartbeat_loop(); });
}

void CuNode::on_stopping() {
  {
    std::lock_guard lock(hb_mu_);
    hb_stop_ = true;
  }
  hb_cv_.notify_all();
  if (heartbeat_.joinable()) heartbeat_.join();
}

void CuNode::heartbeat_loop() {
  std::unique_lock lock(hb_mu_);
  while (!hb_cv_.wait_for(lock, options_.heartbeat_interval, [this] { return hb_stop_; })) {
    lock.unlock();
    register_with_csp();
    lock.lock();
  }
}

std::unique_ptr<HttpNode> make_node(const NodeConfig& config) {
  ZoneMap zones = load_zones(config.zones_file);
  switch (config.role) {
    case Role::lsp:
      return std::make_unique<LspNode>(std::move(zones), LspOptions{}, config.accounts_file);
    case Role::csp: {
      CspOptions options;
      options.grant_on_escalation = config.grant_on_escalation;
      options.heartbeat_interval = config.heartbeat_interval;
      return std::make_unique<CspNode>(std::move(zones), *config.lsp_endpoint, options, config.audit_log);
    }
    case Role::cu: {
      CuNodeOptions options{*config.zone_id, *config.lsp_endpoint, *config.csp_endpoint,
                            config.heartbeat_interval, config.seed_file, {}};
      return std::make_unique<CuNode>(std::move(zones), std::move(options));
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown role");
}

}  // namespace lbs::wire
