#include <lbs/lsp.hpp>

#include <lbs/crypto.hpp>

#include <algorithm>
#include <iterator>

namespace lbs {

LocationServiceProvider::LocationServiceProvider(ZoneMap zones, LspOptions options)
    : zones_(std::move(zones)),
      options_(options),
      decoy_hash_(crypto::hash_password("decoy-password", options.pbkdf2_iterations)) {}

PhoneNumber LocationServiceProvider::register_user(std::string_view phone, std::string_view password,
                                                   std::span<const std::string> preferences) {
  PhoneNumber user = PhoneNumber::parse(phone);
  if (password.size() < options_.min_password_length) {
    throw Error(ErrorCode::WeakPassword,
                "password must be at least " + std::to_string(options_.min_password_length) + " characters");
  }
  std::set<ServiceCategory> subscriptions;
  for (const auto& p : preferences) subscriptions.insert(ServiceCategory::parse(p));

  // Hash outside the lock; PBKDF2 dominates registration cost.
  std::string hash = crypto::hash_password(password, options_.pbkdf2_iterations);

  std::unique_lock lock(accounts_mu_);
  if (accounts_.contains(user)) throw Error(ErrorCode::DuplicatePhone, user.str());
  accounts_.emplace(user, UserAccount{user, std::move(hash), std::move(subscriptions), now_utc()});
  return user;
}

AuthToken LocationServiceProvider::authenticate(std::string_view user_id, std::string_view password) {
  std::optional<std::string> stored;
  std::optional<PhoneNumber> user;
  try {
    user = PhoneNumber::parse(user_id);
    std::shared_lock lock(accounts_mu_);
    if (auto it = accounts_.find(*user); it != accounts_.end()) stored = it->second.credential_hash;
  } catch (const Error&) {
    // Malformed ids fail exactly like unknown ones.
  }
  // Always pay for one derivation so unknown users are not faster to reject.
  const bool ok = crypto::verify_password(password, stored.value_or(decoy_hash_));
  if (!stored || !ok) throw Error(ErrorCode::AuthFailed);

  AuthToken token{crypto::random_hex(32), *user, now_utc(), std::nullopt};
  std::lock_guard lock(sessions_mu_);
  sessions_.emplace(token.token, Session{token, std::chrono::steady_clock::now()});
  return token;
}

void LocationServiceProvider::logout(std::string_view token) {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) return;
  const PhoneNumber user = it->second.token.user_id;
  sessions_.erase(it);
  if (auto loc = located_.find(user); loc != located_.end()) {
    presence_[loc->second].erase(user);
    located_.erase(loc);
  }
}

template <typename Self>
auto& LocationServiceProvider::session_locked(Self& self, std::string_view token) {
  auto it = self.sessions_.find(token);
  if (it == self.sessions_.end()) throw Error(ErrorCode::InvalidToken);
  const auto& ttl = self.options_.token_ttl;
  if (ttl && std::chrono::steady_clock::now() - it->second.issued > *ttl) {
    throw Error(ErrorCode::InvalidToken, "expired");
  }
  return it->second;
}

AuthToken LocationServiceProvider::introspect(std::string_view token) const {
  std::lock_guard lock(sessions_mu_);
  return session_locked(*this, token).token;
}

const UserAccount& LocationServiceProvider::account_locked(const PhoneNumber& user) const {
  auto it = accounts_.find(user);
  if (it == accounts_.end()) throw Error(ErrorCode::UnknownUser, user.str());
  return it->second;
}

bool LocationServiceProvider::authorize(const PhoneNumber& user, const ServiceCategory& category) const {
  std::shared_lock lock(accounts_mu_);
  return account_locked(user).subscriptions.contains(category);
}

std::vector<ServiceCategory> LocationServiceProvider::list_available_services(
    const PhoneNumber& user, const ZoneId& /*zone*/, const std::set<ServiceCategory>& offered) const {
  std::shared_lock lock(accounts_mu_);
  const auto& subs = account_locked(user).subscriptions;
  std::vector<ServiceCategory> out;
  std::set_intersection(subs.begin(), subs.end(), offered.begin(), offered.end(), std::back_inserter(out));
  return out;
}

std::set<ServiceCategory> LocationServiceProvider::subscribe(const PhoneNumber& user,
                                                             const ServiceCategory& category) {
  std::unique_lock lock(accounts_mu_);
  auto it = accounts_.find(user);
  if (it == accounts_.end()) throw Error(ErrorCode::UnknownUser, user.str());
  it->second.subscriptions.insert(category);
  return it->second.subscriptions;
}

std::set<ServiceCategory> LocationServiceProvider::subscriptions(const PhoneNumber& user) const {
  std::shared_lock lock(accounts_mu_);
  return account_locked(user).subscriptions;
}

void LocationServiceProvider::record_presence(std::string_view token, const ZoneId& zone) {
  std::lock_guard lock(sessions_mu_);
  // Validate the token first so an invalid token never reports UnknownZone.
  auto& session = session_locked(*this, token);
  if (!zones_.contains(zone)) throw Error(ErrorCode::UnknownZone, zone);
  const PhoneNumber& user = session.token.user_id;
  if (auto loc = located_.find(user); loc != located_.end()) {
    presence_[loc->second].erase(user);
    loc->second = zone;
  } else {
    located_.emplace(user, zone);
  }
  presence_[zone].insert(user);
  // Every session of this user follows them.
  for (auto& [_, s] : sessions_) {
    if (s.token.user_id == user) s.token.current_zone = zone;
  }
}

std::size_t LocationServiceProvider::count_users(const ZoneId& zone) const {
  if (!zones_.contains(zone)) throw Error(ErrorCode::UnknownZone, zone);
  std::lock_guard lock(sessions_mu_);
  auto it = presence_.find(zone);
  return it == presence_.end() ? 0 : it->second.size();
}

std::vector<UserAccount> LocationServiceProvider::accounts() const {
  std::shared_lock lock(accounts_mu_);
  std::vector<UserAccount> out;
  out.reserve(accounts_.size());
  for (const auto& [_, account] : accounts_) out.push_back(account);
  return out;
}

void LocationServiceProvider::restore(UserAccount account) {
  if (account.credential_hash.empty()) throw Error(ErrorCode::InvalidField, "empty credential hash");
  std::unique_lock lock(accounts_mu_);
  if (accounts_.contains(account.user_id)) throw Error(ErrorCode::DuplicatePhone, account.user_id.str());
  const PhoneNumber key = account.user_id;
  accounts_.emplace(key, std::move(account));
}

}  // namespace lbs
