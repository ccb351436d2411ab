#include <lbs/wire/client.hpp>

#include <lbs/wire/http.hpp>

#include <httplib.h>

namespace lbs::wire {

json Client::register_user(const std::string& phone, const std::string& password,
                           const std::vector<std::string>& preferences) const {
  return call(lsp_, "POST", "/lsp/register", json{{"phone", phone}, {"password", password}, {"preferences", preferences}});
}

json Client::login(const std::string& user_id, const std::string& password) const {
  return call(lsp_, "POST", "/lsp/login", json{{"user_id", user_id}, {"password", password}});
}

json Client::logout(const std::string& token) const {
  return call(lsp_, "POST", "/lsp/logout", json{{"token", token}});
}

json Client::locate_rfid(const std::string& tag) const {
  return call(lsp_, "POST", "/locate", json{{"method", "rfid"}, {"tag", tag}});
}

json Client::locate_gps(std::span<const BeaconObservation> observations) const {
  return call(lsp_, "POST", "/locate", json{{"method", "gps"}, {"observations", to_json(observations)}});
}

json Client::record_presence(const std::string& token, const ZoneId& zone) const {
  return call(lsp_, "POST", "/lsp/presence", json{{"token", token}, {"zone_id", zone}});
}

json Client::presence_count(const ZoneId& zone) const {
  return call(lsp_, "GET", "/lsp/presence/" + zone);
}

json Client::services(const std::string& token, const json& offered) const {
  return call(lsp_, "POST", "/lsp/services", json{{"token", token}, {"offered", offered}});
}

json Client::route(const ZoneId& zone) const {
  return call(csp_, "GET", "/csp/route/" + zone);
}

json Client::audit() const { return call(csp_, "GET", "/csp/audit"); }

json Client::restaurants(const HostPort& cu, const std::string& token) const {
  return call(cu, "GET", "/cu/restaurants", nullptr, CallOptions{token});
}

json Client::query(const HostPort& cu, const std::string& token, const std::string& category) const {
  return call(cu, "POST", "/cu/query", json{{"category", category}}, CallOptions{token});
}

json Client::info(const HostPort& cu, const std::string& token, const std::string& restaurant_id) const {
  return call(cu, "GET", "/cu/restaurants/" + restaurant_id, nullptr, CallOptions{token});
}

json Client::categories(const HostPort& cu) const { return call(cu, "GET", "/cu/categories"); }

json Client::ingest(const HostPort& cu, const std::string& seed_lines) const {
  httplib::Client client(cu.host, cu.port);
  auto res = client.Post("/cu/ingest", seed_lines, "application/x-ndjson");
  if (!res) throw TransportError("POST " + cu.str() + "/cu/ingest: " + httplib::to_string(res.error()));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw TransportError(cu.str() + "/cu/ingest answered with a non-JSON body");
  }
}

json Client::health(const HostPort& node) const { return call(node, "GET", "/healthz"); }

}  // namespace lbs::wire
