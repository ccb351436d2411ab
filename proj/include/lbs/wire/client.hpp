#pragma once

#include <lbs/geolocation.hpp>
#include <lbs/wire/codec.hpp>
#include <lbs/wire/files.hpp>

#include <span>
#include <string>
#include <vector>

namespace lbs::wire {

/// Thin typed wrapper over the HTTP surface. Every method returns the raw
/// response envelope; transport failures throw TransportError.
class Client {
 public:
  Client(HostPort lsp, HostPort csp) : lsp_(std::move(lsp)), csp_(std::move(csp)) {}

  const HostPort& lsp() const noexcept { return lsp_; }
  const HostPort& csp() const noexcept { return csp_; }

  json register_user(const std::string& phone, const std::string& password,
                     const std::vector<std::string>& preferences) const;
  json login(const std::string& user_id, const std::string& password) const;
  json logout(const std::string& token) const;
  json locate_rfid(const std::string& tag) const;
  json locate_gps(std::span<const BeaconObservation> observations) const;
  json record_presence(const std::string& token, const ZoneId& zone) const;
  json presence_count(const ZoneId& zone) const;
  json services(const std::string& token, const json& offered) const;
  json route(const ZoneId& zone) const;
  json audit() const;

  json restaurants(const HostPort& cu, const std::string& token) const;
  json query(const HostPort& cu, const std::string& token, const std::string& category) const;
  json info(const HostPort& cu, const std::string& token, const std::string& restaurant_id) const;
  json categories(const HostPort& cu) const;
  /// POST /cu/ingest with restaurants seed-file content.
  json ingest(const HostPort& cu, const std::string& seed_lines) const;

  json health(const HostPort& node) const;

 private:
  HostPort lsp_;
  HostPort csp_;
};

}  // namespace lbs::wire
