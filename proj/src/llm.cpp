#include "darklabel/llm.hpp"

#include "darklabel/csv.hpp"
#include "darklabel/persistence.hpp"

namespace darklabel {

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::InvalidRequest, "request has no messages");
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw Error(ErrorCode::InvalidRequest, "temperature must be within [0, 2]");
  if (max_output_tokens && *max_output_tokens <= 0)
    throw Error(ErrorCode::InvalidRequest, "max_output_tokens must be positive");
}

const std::string& ChatRequest::last_user_content() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it)
    if (it->role == ChatMessage::Role::User) return it->content;
  return kEmpty;
}

ChatRequest ChatRequest::user(std::string model, std::string content) {
  ChatRequest r;
  r.model = std::move(model);
  r.messages.push_back({ChatMessage::Role::User, std::move(content)});
  return r;
}

CostTable CostTable::defaults() {
  CostTable t;
  t.models["gpt-4o-2024-05-13"] = {5.0, 15.0};
  t.models["mock-lexicon-v1"] = {5.0, 15.0};
  return t;
}

CostTable CostTable::from_json_text(const std::string& text) {
  CostTable t;
  try {
    const auto j = Json::parse(text);
    t.currency = j.value("currency", std::string("USD"));
    for (const auto& [model, p] : j.at("models").items()) {
      Price price{p.at("input_per_1m").get<double>(), p.at("output_per_1m").get<double>()};
      if (price.input_per_million < 0 || price.output_per_million < 0)
        throw Error(ErrorCode::InvalidConfig, "prices must be non-negative", model);
      t.models[model] = price;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("invalid cost table: ") + e.what());
  }
  return t;
}

CostTable CostTable::load(const std::string& path) { return from_json_text(csv::read_file(path)); }

double compute_cost(const Usage& usage, const std::string& model, const CostTable& table) {
  auto it = table.models.find(model);
  if (it == table.models.end())
    throw Error(ErrorCode::UnknownModel, "model missing from cost table", model);
  return static_cast<double>(usage.prompt_tokens) * it->second.input_per_million / 1e6 +
         static_cast<double>(usage.completion_tokens) * it->second.output_per_million / 1e6;
}

}  // namespace darklabel
