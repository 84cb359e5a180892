#pragma once

#include <chrono>
#include <string>

#include "darklabel/llm.hpp"

namespace darklabel {

struct OpenAiConfig {
  /// e.g. "https://api.openai.com" or "http://127.0.0.1:8080/v1"; requests go
  /// to <base>/v1/chat/completions unless the base already ends in /v1.
  std::string base_url = "https://api.openai.com";
  std::string api_key;
  std::string model = "gpt-4o-2024-05-13";
  std::chrono::seconds timeout{120};

  /// Reads DARKLABEL_BASE_URL, DARKLABEL_API_KEY and DARKLABEL_MODEL.
  /// Throws InvalidConfig when no API key is set.
  static OpenAiConfig from_env();
};

/// Chat-completion client for endpoints compatible with the OpenAI API.
/// Surfaces raw errors; retry policy lives in the annotation engine.
class OpenAiProvider : public Provider {
 public:
  explicit OpenAiProvider(OpenAiConfig config);

  Completion complete(const ChatRequest& request) override;
  std::string model() const override { return config_.model; }

 private:
  OpenAiConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace darklabel
