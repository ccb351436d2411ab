#include <lbs/wire/http.hpp>

#include <httplib.h>

namespace lbs::wire {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidPhone:
    case ErrorCode::WeakPassword:
    case ErrorCode::InvalidField:
    case ErrorCode::ParseError:
    case ErrorCode::Underdetermined:
    case ErrorCode::DegenerateGeometry:
      return 400;
    case ErrorCode::AuthFailed:
    case ErrorCode::InvalidToken:
      return 401;
    case ErrorCode::NotAuthorized:
      return 403;
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownZone:
    case ErrorCode::UnknownTag:
    case ErrorCode::NotFound:
    case ErrorCode::NoCuForZone:
    case ErrorCode::NotCovered:
      return 404;
    case ErrorCode::DuplicatePhone:
    case ErrorCode::WrongZone:
      return 409;
    case ErrorCode::ZoneMismatch:
      return 422;
    case ErrorCode::CspUnreachable:
    case ErrorCode::LspUnreachable:
      return 502;
    case ErrorCode::PartialResult:
      return 200;
    case ErrorCode::ConfigError:
    case ErrorCode::BindError:
    case ErrorCode::StepFailed:
    case ErrorCode::InternalError:
      return 500;
  }
  return 500;
}

json call(const HostPort& peer, std::string_view method, const std::string& path, const json& body,
          const CallOptions& options) {
  httplib::Client client(peer.host, peer.port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (options.bearer) headers.emplace("Authorization", "Bearer " + *options.bearer);

  httplib::Result res;
  if (method == "GET") {
    res = client.Get(path, headers);
  } else if (method == "POST") {
    res = client.Post(path, headers, body.is_null() ? std::string("{}") : body.dump(), "application/json");
  } else {
    throw std::invalid_argument("unsupported method " + std::string(method));
  }
  if (!res) {
    throw TransportError(std::string(method) + " " + peer.str() + path + ": " + httplib::to_string(res.error()));
  }
  json envelope;
  try {
    envelope = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw TransportError(peer.str() + path + " answered with a non-JSON body (HTTP " +
                         std::to_string(res->status) + ")");
  }
  if (!is_envelope(envelope)) throw TransportError(peer.str() + path + " answered without an envelope");
  return envelope;
}

json unwrap(const json& envelope) {
  if (envelope.value("status", "") == "ok") return envelope.at("data");
  const auto code = envelope_error(envelope);
  throw Error(code.value_or(ErrorCode::InternalError), envelope.value("message", ""));
}

TokenInfo HttpTokenValidator::introspect(std::string_view token) {
  json data;
  try {
    data = unwrap(call(lsp_, "POST", "/lsp/introspect", json{{"token", token}}));
  } catch (const TransportError& e) {
    throw Error(ErrorCode::LspUnreachable, e.what());
  }
  TokenInfo info{PhoneNumber::parse(require_string(data, "user_id")),
                 categories_from_json(require(data, "subscriptions")), std::nullopt};
  if (const json& zone = require(data, "current_zone"); zone.is_string()) info.current_zone = zone.get<std::string>();
  return info;
}

EscalationResult HttpEscalationChannel::escalate(const EscalationRequest& request) {
  json envelope;
  try {
    envelope = call(csp_, "POST", "/csp/escalate", to_json(request), CallOptions{std::nullopt, timeout_});
  } catch (const TransportError& e) {
    throw Error(ErrorCode::CspUnreachable, e.what());
  }
  return escalation_result_from_json(unwrap(envelope));
}

std::set<ServiceCategory> HttpAccountDirectory::subscriptions(const PhoneNumber& user) {
  try {
    return categories_from_json(require(unwrap(call(lsp_, "GET", "/lsp/users/" + user.str())), "subscriptions"));
  } catch (const TransportError& e) {
    throw Error(ErrorCode::LspUnreachable, e.what());
  }
}

std::set<ServiceCategory> HttpAccountDirectory::subscribe(const PhoneNumber& user, const ServiceCategory& category) {
  try {
    const json body{{"user_id", user.str()}, {"category", category.str()}};
    return categories_from_json(require(unwrap(call(lsp_, "POST", "/lsp/subscribe", body)), "subscriptions"));
  } catch (const TransportError& e) {
    throw Error(ErrorCode::LspUnreachable, e.what());
  }
}

std::vector<Restaurant> HttpCuGateway::search(const std::string& endpoint, const ServiceCategory& category,
                                              std::chrono::milliseconds timeout) {
  const json envelope = call(parse_endpoint(endpoint), "GET", "/cu/internal/search?category=" + category.str(),
                             nullptr, CallOptions{std::nullopt, timeout});
  return restaurants_from_json(require(unwrap(envelope), "restaurants"));
}

}  // namespace lbs::wire
