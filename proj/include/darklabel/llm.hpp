#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "darklabel/error.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

struct ChatMessage {
  enum class Role { System, User };
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_output_tokens;

  /// Throws InvalidRequest (no messages, temperature outside [0, 2]).
  void validate() const;
  /// Content of the last user message, or empty.
  const std::string& last_user_content() const;

  static ChatRequest user(std::string model, std::string content);
};

struct Completion {
  std::string text;
  Usage usage;
  /// Set when token counts are estimates rather than provider-reported.
  bool usage_estimated = false;
};

/// Provider failure. The code is one of Transport, RateLimited or
/// ProviderError; `status` and `retry_after` are filled where they apply.
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, const std::string& message, int status = 0,
                  std::optional<std::chrono::milliseconds> retry_after = std::nullopt,
                  std::string body = {})
      : Error(code, message, body), status_(status), retry_after_(retry_after) {}

  int status() const noexcept { return status_; }
  std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

 private:
  int status_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

/// Chat-completion backend. Implementations must tolerate concurrent calls.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const ChatRequest& request) = 0;
  virtual std::string model() const = 0;
};

struct Price {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

struct CostTable {
  std::string currency = "USD";
  std::map<std::string, Price> models;

  /// Built-in prices: gpt-4o-2024-05-13 and the mock model, both 5 / 15 USD
  /// per million input / output tokens.
  static CostTable defaults();
  /// JSON: {"currency": "USD", "models": {"<id>": {"input_per_1m": x, "output_per_1m": y}}}
  static CostTable from_json_text(const std::string& text);
  static CostTable load(const std::string& path);
};

/// Throws UnknownModel.
double compute_cost(const Usage& usage, const std::string& model, const CostTable& table);

}  // namespace darklabel
