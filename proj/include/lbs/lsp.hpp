#pragma once

#include <lbs/domain.hpp>

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lbs {

struct LspOptions {
  int pbkdf2_iterations = 20000;
  std::size_t min_password_length = 8;
  /// Sessions never expire when unset; logout is the only way out.
  std::optional<std::chrono::seconds> token_ttl;
};

/// Location Service Provider: accounts keyed by phone number, bearer
/// sessions, subscription checks and per-zone presence.
///
/// Every operation is linearizable and safe to call from concurrent request
/// handlers. The uniqueness check in register_user is atomic with the insert.
class LocationServiceProvider {
 public:
  explicit LocationServiceProvider(ZoneMap zones, LspOptions options = {});

  const ZoneMap& zones() const noexcept { return zones_; }

  /// Returns the canonical phone, which is also the user id.
  /// Errors: InvalidPhone, WeakPassword, InvalidField (bad category), DuplicatePhone.
  PhoneNumber register_user(std::string_view phone, std::string_view password,
                            std::span<const std::string> preferences);

  /// Issues a fresh session with no zone. Unknown user and wrong password both
  /// raise AuthFailed.
  AuthToken authenticate(std::string_view user_id, std::string_view password);

  /// Drops the session and its presence entry. Unknown tokens are ignored.
  void logout(std::string_view token);

  /// Throws InvalidToken for unknown or expired tokens.
  AuthToken introspect(std::string_view token) const;

  bool authorize(const PhoneNumber& user, const ServiceCategory& category) const;

  /// sort(subscriptions(user) ∩ offered). `zone` names where the offer comes from.
  std::vector<ServiceCategory> list_available_services(const PhoneNumber& user, const ZoneId& zone,
                                                       const std::set<ServiceCategory>& offered) const;

  std::set<ServiceCategory> subscribe(const PhoneNumber& user, const ServiceCategory& category);
  std::set<ServiceCategory> subscriptions(const PhoneNumber& user) const;

  /// Moves the session's user into `zone`, out of any previous zone.
  void record_presence(std::string_view token, const ZoneId& zone);
  std::size_t count_users(const ZoneId& zone) const;

  /// Snapshot for persistence, ordered by user id.
  std::vector<UserAccount> accounts() const;
  /// Inserts a previously persisted account. Throws DuplicatePhone.
  void restore(UserAccount account);

 private:
  struct Session {
    AuthToken token;
    std::chrono::steady_clock::time_point issued;
  };

  const UserAccount& account_locked(const PhoneNumber& user) const;
  template <typename Self>
  static auto& session_locked(Self& self, std::string_view token);

  ZoneMap zones_;
  LspOptions options_;
  std::string decoy_hash_;

  mutable std::shared_mutex accounts_mu_;
  std::map<PhoneNumber, UserAccount> accounts_;

  // Sessions and presence change together under one lock.
  mutable std::mutex sessions_mu_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::map<ZoneId, std::set<PhoneNumber>> presence_;
  std::map<PhoneNumber, ZoneId> located_;
};

}  // namespace lbs
