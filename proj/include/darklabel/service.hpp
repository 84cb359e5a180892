#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "darklabel/error.hpp"
#include "darklabel/llm.hpp"

namespace darklabel {

enum class ProviderKind { Mock, Live };

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path state_dir = "darklabel-state";
  ProviderKind provider = ProviderKind::Mock;
  std::string lexicon_path;     // mock provider word lists; empty = built-in
  std::string cost_table_path;  // empty = built-in prices
  int concurrency = 4;
  std::uint64_t seed = 0;       // used when a request omits its seed
  std::string auth_token;       // when set, requests need "Authorization: Bearer <token>"

  /// Throws InvalidConfig (bad concurrency or port, live provider without
  /// DARKLABEL_API_KEY) or Io (state directory not writable).
  void validate() const;
};

/// Mock provider from `lexicon_path`, or the live client configured from the
/// environment.
std::shared_ptr<Provider> make_provider(ProviderKind kind, const std::string& lexicon_path);

/// HTTP status for an error code: 400 precondition, 401 auth, 404 unknown id
/// or route, 409 conflict, 502 provider failure, 500 storage.
int http_status(ErrorCode code) noexcept;

/// JSON-over-HTTP front end of the workbook operations. Annotation runs in a
/// background thread per workbook; other mutations serialize per workbook.
class Service {
 public:
  /// `provider` overrides the one named by the config.
  explicit Service(ServerConfig config, std::shared_ptr<Provider> provider = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread. Returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  /// Blocks until no annotation is running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace darklabel
