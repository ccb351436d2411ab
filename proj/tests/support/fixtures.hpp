#pragma once

// Shared builders and in-memory fakes for the test suites.

#include <lbs/cloud_unit.hpp>
#include <lbs/csp.hpp>
#include <lbs/domain.hpp>
#include <lbs/geolocation.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace fixture {

inline std::vector<lbs::GeoPoint> rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

inline lbs::Zone zone(std::string id, std::vector<lbs::GeoPoint> polygon) {
  return lbs::Zone{id, id, std::move(polygon)};
}

/// Zones z00, z01, ... as 100 m squares laid out along the x axis.
inline lbs::ZoneMap strip_map(int n) {
  std::vector<lbs::Zone> zones;
  std::map<std::string, lbs::ZoneId> tags;
  for (int i = 0; i < n; ++i) {
    const std::string id = (i < 10 ? "z0" : "z") + std::to_string(i);
    zones.push_back(zone(id, rect(100.0 * i, 0, 100.0 * (i + 1), 100)));
    tags.emplace("T-" + id, id);
  }
  return lbs::ZoneMap(std::move(zones), std::move(tags));
}

/// Centre of strip_map zone `i`.
inline lbs::GeoPoint strip_centre(int i) { return {100.0 * i + 50.0, 50.0}; }

inline lbs::Restaurant restaurant(std::string id, lbs::ZoneId zone, std::string_view style, lbs::GeoPoint at,
                                  std::string name = "Place") {
  return lbs::Restaurant{std::move(id),
                         std::move(name),
                         "1 Main St",
                         lbs::PhoneNumber::parse("+91 80 4100 0000"),
                         lbs::ServiceCategory::parse(style),
                         at,
                         std::move(zone)};
}

inline std::set<lbs::ServiceCategory> categories(std::initializer_list<std::string_view> names) {
  std::set<lbs::ServiceCategory> out;
  for (auto n : names) out.insert(lbs::ServiceCategory::parse(n));
  return out;
}

/// Token table standing in for the LSP. Counts introspection calls.
class FakeValidator final : public lbs::TokenValidator {
 public:
  void set(const std::string& token, lbs::TokenInfo info) {
    std::lock_guard lock(mu_);
    tokens_.insert_or_assign(token, std::move(info));
  }
  void erase(const std::string& token) {
    std::lock_guard lock(mu_);
    tokens_.erase(token);
  }
  lbs::TokenInfo introspect(std::string_view token) override {
    ++calls;
    std::lock_guard lock(mu_);
    auto it = tokens_.find(std::string(token));
    if (it == tokens_.end()) throw lbs::Error(lbs::ErrorCode::InvalidToken);
    return it->second;
  }
  std::atomic<int> calls{0};

 private:
  std::mutex mu_;
  std::map<std::string, lbs::TokenInfo> tokens_;
};

/// Records every escalation and answers with a canned result.
class FakeChannel final : public lbs::EscalationChannel {
 public:
  lbs::EscalationResult escalate(const lbs::EscalationRequest& request) override {
    std::lock_guard lock(mu_);
    if (down) throw lbs::Error(lbs::ErrorCode::CspUnreachable);
    requests.push_back(request);
    return reply;
  }
  std::mutex mu_;
  bool down = false;
  lbs::EscalationResult reply;
  std::vector<lbs::EscalationRequest> requests;
};

class FakeAccounts final : public lbs::AccountDirectory {
 public:
  void add(const std::string& user, std::set<lbs::ServiceCategory> subs = {}) {
    std::lock_guard lock(mu_);
    subs_[user] = std::move(subs);
  }
  std::set<lbs::ServiceCategory> subscriptions(const lbs::PhoneNumber& user) override {
    std::lock_guard lock(mu_);
    auto it = subs_.find(user.str());
    if (it == subs_.end()) throw lbs::Error(lbs::ErrorCode::UnknownUser);
    return it->second;
  }
  std::set<lbs::ServiceCategory> subscribe(const lbs::PhoneNumber& user, const lbs::ServiceCategory& c) override {
    std::lock_guard lock(mu_);
    auto it = subs_.find(user.str());
    if (it == subs_.end()) throw lbs::Error(lbs::ErrorCode::UnknownUser);
    it->second.insert(c);
    return it->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::set<lbs::ServiceCategory>> subs_;
};

/// Endpoint -> restaurants. Endpoints listed in `down` throw; those in
/// `slow` sleep past the timeout first.
class FakeGateway final : public lbs::CuGateway {
 public:
  std::vector<lbs::Restaurant> search(const std::string& endpoint, const lbs::ServiceCategory& category,
                                      std::chrono::milliseconds timeout) override {
    ++calls;
    if (down.contains(endpoint)) throw lbs::Error(lbs::ErrorCode::InternalError, "down");
    if (slow.contains(endpoint)) std::this_thread::sleep_for(timeout * 2);
    std::vector<lbs::Restaurant> out;
    if (auto it = stores.find(endpoint); it != stores.end()) {
      for (const auto& r : it->second) {
        if (r.food_style == category) out.push_back(r);
      }
    }
    return out;
  }
  std::map<std::string, std::vector<lbs::Restaurant>> stores;
  std::set<std::string> down;
  std::set<std::string> slow;
  std::atomic<int> calls{0};
};

/// Manually advanced steady clock.
struct ManualClock {
  std::shared_ptr<std::chrono::steady_clock::time_point> now =
      std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::time_point{} +
                                                              std::chrono::hours(1));
  void advance(std::chrono::milliseconds d) const { *now += d; }
  std::function<std::chrono::steady_clock::time_point()> fn() const {
    auto p = now;
    return [p] { return *p; };
  }
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lbs-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
