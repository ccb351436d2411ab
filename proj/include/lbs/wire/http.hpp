#pragma once

#include <lbs/cloud_unit.hpp>
#include <lbs/csp.hpp>
#include <lbs/wire/codec.hpp>
#include <lbs/wire/files.hpp>

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace lbs::wire {

/// The peer could not be reached or did not answer with an envelope.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HTTP status used for each error code.
int http_status(ErrorCode code) noexcept;

struct CallOptions {
  std::optional<std::string> bearer;
  std::chrono::milliseconds timeout{5000};
};

/// Sends one request and returns the response envelope. `body` null means no
/// body (GET). Throws TransportError.
json call(const HostPort& peer, std::string_view method, const std::string& path, const json& body = nullptr,
          const CallOptions& options = {});

/// Returns `data` of an ok envelope; throws Error(code) for error envelopes.
json unwrap(const json& envelope);

/// Introspects tokens through POST /lsp/introspect.
class HttpTokenValidator final : public TokenValidator {
 public:
  explicit HttpTokenValidator(HostPort lsp) : lsp_(std::move(lsp)) {}
  TokenInfo introspect(std::string_view token) override;

 private:
  HostPort lsp_;
};

/// Sends escalations to POST /csp/escalate. Transport failure is CspUnreachable.
class HttpEscalationChannel final : public EscalationChannel {
 public:
  explicit HttpEscalationChannel(HostPort csp, std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : csp_(std::move(csp)), timeout_(timeout) {}
  EscalationResult escalate(const EscalationRequest& request) override;

 private:
  HostPort csp_;
  std::chrono::milliseconds timeout_;
};

/// LSP account lookups and grants for the CSP.
class HttpAccountDirectory final : public AccountDirectory {
 public:
  explicit HttpAccountDirectory(HostPort lsp) : lsp_(std::move(lsp)) {}
  std::set<ServiceCategory> subscriptions(const PhoneNumber& user) override;
  std::set<ServiceCategory> subscribe(const PhoneNumber& user, const ServiceCategory& category) override;

 private:
  HostPort lsp_;
};

/// Fan-out leg: GET /cu/internal/search?category=... on a Cloud Unit.
class HttpCuGateway final : public CuGateway {
 public:
  std::vector<Restaurant> search(const std::string& endpoint, const ServiceCategory& category,
                                 std::chrono::milliseconds timeout) override;
};

}  // namespace lbs::wire
