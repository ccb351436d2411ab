#pragma once

// HTTP front ends for the three node roles. Each node binds on start() and
// serves on a background thread until stop() or destruction.

#include <lbs/cloud_unit.hpp>
#include <lbs/csp.hpp>
#include <lbs/lsp.hpp>
#include <lbs/wire/files.hpp>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace lbs::wire {

class HttpNode {
 public:
  HttpNode();
  virtual ~HttpNode();
  HttpNode(const HttpNode&) = delete;
  HttpNode& operator=(const HttpNode&) = delete;

  /// Binds and starts serving. Port 0 picks a free port. Throws BindError.
  void start(const HostPort& listen);
  void stop();

  /// The bound address; valid after start().
  const HostPort& endpoint() const noexcept { return bound_; }
  bool running() const noexcept { return running_; }

 protected:
  httplib::Server& server() noexcept { return *server_; }
  virtual void on_started() {}
  virtual void on_stopping() {}

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  HostPort bound_;
  std::atomic<bool> running_{false};
};

class LspNode final : public HttpNode {
 public:
  LspNode(ZoneMap zones, LspOptions options = {},
          std::optional<std::filesystem::path> accounts_file = std::nullopt);

  LocationServiceProvider& lsp() noexcept { return lsp_; }

 private:
  void persist();

  LocationServiceProvider lsp_;
  std::optional<std::filesystem::path> accounts_file_;
  std::mutex persist_mu_;
};

class CspNode final : public HttpNode {
 public:
  CspNode(ZoneMap zones, HostPort lsp, CspOptions options = {},
          std::optional<std::filesystem::path> audit_log = std::nullopt);

  CloudServiceProvider& csp() noexcept { return csp_; }

 private:
  CloudServiceProvider csp_;
};

struct CuNodeOptions {
  ZoneId zone_id;
  HostPort lsp;
  HostPort csp;
  std::chrono::milliseconds heartbeat_interval{5000};
  std::optional<std::filesystem::path> seed_file;
  CuOptions unit;
};

/// Cloud Unit node. After start() it registers with the CSP and re-registers
/// every heartbeat interval; /healthz reports "degraded" while the last
/// attempt failed.
class CuNode final : public HttpNode {
 public:
  CuNode(ZoneMap zones, CuNodeOptions options);
  ~CuNode() override;

  CloudUnit& unit() noexcept { return unit_; }
  bool registered() const noexcept { return registered_; }

  /// One registration attempt; returns success.
  bool register_with_csp();

 private:
  void on_started() override;
  void on_stopping() override;
  void heartbeat_loop();

  CuNodeOptions options_;
  CloudUnit unit_;
  std::atomic<bool> registered_{false};
  std::thread heartbeat_;
  std::mutex hb_mu_;
  std::condition_variable hb_cv_;
  bool hb_stop_ = false;
};

/// Builds the node described by a config file (not yet started).
std::unique_ptr<HttpNode> make_node(const NodeConfig& config);

}  // namespace lbs::wire
