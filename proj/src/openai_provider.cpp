#include "darklabel/openai_provider.hpp"

#include <httplib.h>

#include <cstdlib>

#include "darklabel/persistence.hpp"

namespace darklabel {

OpenAiConfig OpenAiConfig::from_env() {
  OpenAiConfig c;
  if (const char* v = std::getenv("DARKLABEL_BASE_URL"); v && *v) c.base_url = v;
  if (const char* v = std::getenv("DARKLABEL_MODEL"); v && *v) c.model = v;
  const char* key = std::getenv("DARKLABEL_API_KEY");
  if (!key || !*key) throw Error(ErrorCode::InvalidConfig, "DARKLABEL_API_KEY is not set");
  c.api_key = key;
  return c;
}

OpenAiProvider::OpenAiProvider(OpenAiConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::InvalidConfig, "base URL needs a scheme", url);
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
  if (base_path.size() < 3 || base_path.substr(base_path.size() - 3) != "/v1") base_path += "/v1";
  path_ = base_path + "/chat/completions";
}

Completion OpenAiProvider::complete(const ChatRequest& request) {
  request.validate();
  Json messages = Json::array();
  for (const auto& m : request.messages)
    messages.push_back(
        {{"role", m.role == ChatMessage::Role::System ? "system" : "user"}, {"content", m.content}});
  Json body{{"model", request.model.empty() ? config_.model : request.model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature}};
  if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;

  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw ProviderFailure(ErrorCode::Transport, "transport error: " + httplib::to_string(res.error()));

  if (res->status == 429) {
    std::optional<std::chrono::milliseconds> retry_after;
    if (res->has_header("Retry-After")) {
      try {
        retry_after = std::chrono::milliseconds(
            static_cast<long long>(std::stod(res->get_header_value("Retry-After")) * 1000));
      } catch (const std::exception&) {
      }
    }
    throw ProviderFailure(ErrorCode::RateLimited, "rate limited", 429, retry_after, res->body);
  }
  if (res->status < 200 || res->status >= 300)
    throw ProviderFailure(ErrorCode::ProviderError,
                          "provider returned HTTP " + std::to_string(res->status), res->status,
                          std::nullopt, res->body);

  try {
    const auto j = Json::parse(res->body);
    Completion c;
    c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      c.usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
      c.usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderFailure(ErrorCode::ProviderError,
                          std::string("malformed completion body: ") + e.what(), res->status,
                          std::nullopt, res->body);
  }
}

}  // namespace darklabel
