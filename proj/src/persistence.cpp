#include "darklabel/persistence.hpp"

#include <filesystem>
#include <fstream>

#include "darklabel/csv.hpp"
#include "darklabel/error.hpp"
#include "darklabel/workbook.hpp"

namespace darklabel {

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(Json& j, const LabelScale& s) { j = Json{{"labels", s.labels()}}; }
void from_json(const Json& j, LabelScale& s) {
  s = LabelScale(j.at("labels").get<std::vector<std::string>>());
}

void to_json(Json& j, const DatasetRow& r) {
  Json extras = Json::array();
  for (const auto& [k, v] : r.extras) extras.push_back(Json::array({k, v}));
  j = Json{{"data_id", opt(r.data_id)},
           {"group_id", r.group_id},
           {"text", r.text},
           {"extras", std::move(extras)}};
}
void from_json(const Json& j, DatasetRow& r) {
  r.data_id = get_opt<std::int64_t>(j, "data_id");
  r.group_id = j.at("group_id").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.extras.clear();
  for (const auto& kv : j.value("extras", Json::array()))
    r.extras.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
}

void to_json(Json& j, const ContextAnswer& c) {
  j = Json{{"question_id", to_string(c.question_id)},
           {"question_text", c.question_text},
           {"answer", c.answer}};
}
void from_json(const Json& j, ContextAnswer& c) {
  c.question_id = question_id_from_string(j.at("question_id").get<std::string>());
  c.question_text = j.at("question_text").get<std::string>();
  c.answer = j.at("answer").get<std::string>();
}

void to_json(Json& j, const LabelRule& r) {
  j = Json{{"label", r.label}, {"rule_text", r.rule_text}, {"position", r.position}};
}
void from_json(const Json& j, LabelRule& r) {
  r.label = j.at("label").get<std::string>();
  r.rule_text = j.at("rule_text").get<std::string>();
  r.position = j.at("position").get<int>();
}

void to_json(Json& j, const Shot& s) {
  Json src = s.source.kind == ShotSource::Kind::Manual
                 ? Json{{"kind", "manual"}}
                 : Json{{"kind", "promoted"},
                        {"task_number", s.source.task_number},
                        {"data_id", s.source.data_id}};
  j = Json{{"text", s.text}, {"gold_label", s.gold_label}, {"source", std::move(src)}};
}
void from_json(const Json& j, Shot& s) {
  s.text = j.at("text").get<std::string>();
  s.gold_label = j.at("gold_label").get<std::string>();
  const auto& src = j.at("source");
  if (src.at("kind").get<std::string>() == "promoted")
    s.source = ShotSource::promoted(src.at("task_number").get<std::int64_t>(),
                                    src.at("data_id").get<std::int64_t>());
  else
    s.source = ShotSource::manual();
}

void to_json(Json& j, const SampleEntry& e) {
  j = Json{{"data_id", e.data_id},
           {"group_id", e.group_id},
           {"text", e.text},
           {"keep_pin", e.keep_pin}};
}
void from_json(const Json& j, SampleEntry& e) {
  e.data_id = j.at("data_id").get<std::int64_t>();
  e.group_id = j.at("group_id").get<std::string>();
  e.text = j.at("text").get<std::string>();
  e.keep_pin = j.at("keep_pin").get<bool>();
}

void to_json(Json& j, const Usage& u) {
  j = Json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}
void from_json(const Json& j, Usage& u) {
  u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
}

void to_json(Json& j, const InstructionalPrompt& p) {
  j = Json{{"text", p.text},
           {"generated_at", p.generated_at},
           {"source_context_digest", p.source_context_digest}};
}
void from_json(const Json& j, InstructionalPrompt& p) {
  p.text = j.at("text").get<std::string>();
  p.generated_at = j.at("generated_at").get<std::string>();
  p.source_context_digest = j.at("source_context_digest").get<std::string>();
}

void to_json(Json& j, const PromptBundle& b) {
  j = Json{{"instructional", b.instructional},
           {"rules_snapshot", b.rules_snapshot},
           {"shots_snapshot", b.shots_snapshot},
           {"label_scale", b.label_scale}};
}
void from_json(const Json& j, PromptBundle& b) {
  b.instructional = j.at("instructional").get<InstructionalPrompt>();
  b.rules_snapshot = j.at("rules_snapshot").get<std::vector<LabelRule>>();
  b.shots_snapshot = j.at("shots_snapshot").get<std::vector<Shot>>();
  b.label_scale = j.at("label_scale").get<LabelScale>();
}

void to_json(Json& j, const AnnotationResult& r) {
  j = Json{{"data_id", r.data_id},
           {"group_id", r.group_id},
           {"text", r.text},
           {"llm_label", opt(r.llm_label)},
           {"llm_explanation", opt(r.llm_explanation)},
           {"parse_error", opt(r.parse_error)},
           {"human_label", opt(r.human_label)},
           {"agree", r.agree},
           {"gold_shot", r.gold_shot_flag},
           {"keep", r.keep_flag}};
}
void from_json(const Json& j, AnnotationResult& r) {
  r.data_id = j.at("data_id").get<std::int64_t>();
  r.group_id = j.at("group_id").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.llm_label = get_opt<std::string>(j, "llm_label");
  r.llm_explanation = get_opt<std::string>(j, "llm_explanation");
  r.parse_error = get_opt<std::string>(j, "parse_error");
  r.human_label = get_opt<std::string>(j, "human_label");
  r.agree = j.at("agree").get<bool>();
  r.gold_shot_flag = j.at("gold_shot").get<bool>();
  r.keep_flag = j.at("keep").get<bool>();
}

void to_json(Json& j, const TaskRecord& t) {
  j = Json{{"task_number", t.task_number},
           {"created_at", t.created_at},
           {"prompt_bundle", t.prompt_bundle},
           {"show_explanations", t.show_explanations},
           {"model", t.model},
           {"results", t.results},
           {"total_cost", t.total_cost},
           {"total_usage", t.total_usage},
           {"usage_estimated", t.usage_estimated}};
}
void from_json(const Json& j, TaskRecord& t) {
  t.task_number = j.at("task_number").get<std::int64_t>();
  t.created_at = j.at("created_at").get<std::string>();
  t.prompt_bundle = j.at("prompt_bundle").get<PromptBundle>();
  t.show_explanations = j.at("show_explanations").get<bool>();
  t.model = j.value("model", std::string{});
  t.results = j.at("results").get<std::vector<AnnotationResult>>();
  t.total_cost = j.at("total_cost").get<double>();
  t.total_usage = j.at("total_usage").get<Usage>();
  t.usage_estimated = j.value("usage_estimated", false);
}

Json workbook_to_json(const Workbook& wb) {
  Json j{{"name", wb.name},
         {"schema_version", kSchemaVersion},
         {"label_scale", wb.label_scale},
         {"dataset", wb.dataset},
         {"context", wb.context},
         {"rulebook", wb.rulebook},
         {"shots", wb.shots},
         {"working_sample", wb.working_sample},
         {"tasks", wb.tasks}};
  if (wb.instruction_cache) j["instruction_cache"] = *wb.instruction_cache;
  return j;
}

Workbook workbook_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedWorkbook, "workbook must be a JSON object");
  const auto version = j.value("schema_version", std::string{});
  if (version != kSchemaVersion)
    throw Error(ErrorCode::UnsupportedVersion, "unsupported workbook schema version", version);
  Workbook wb;
  try {
    wb.name = j.at("name").get<std::string>();
    wb.label_scale = j.at("label_scale").get<LabelScale>();
    wb.dataset = j.at("dataset").get<std::vector<DatasetRow>>();
    wb.context = j.at("context").get<std::vector<ContextAnswer>>();
    wb.rulebook = j.at("rulebook").get<std::vector<LabelRule>>();
    wb.shots = j.at("shots").get<std::vector<Shot>>();
    wb.working_sample = j.at("working_sample").get<std::vector<SampleEntry>>();
    wb.tasks = j.at("tasks").get<std::vector<TaskRecord>>();
    wb.instruction_cache = get_opt<InstructionalPrompt>(j, "instruction_cache");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedWorkbook, e.what());
  }
  validate_workbook(wb);
  return wb;
}

void save_workbook(const Workbook& wb, const std::string& path) {
  // Atomic replace: write a sibling file, then rename over the target.
  const std::string tmp = path + ".tmp";
  csv::write_file(tmp, workbook_to_json(wb).dump(2) + "\n");
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path + ": " + ec.message());
}

Workbook load_workbook(const std::string& path) {
  const auto content = csv::read_file(path);
  Json j;
  try {
    j = Json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedWorkbook, std::string("invalid JSON: ") + e.what());
  }
  return workbook_from_json(j);
}

}  // namespace darklabel
