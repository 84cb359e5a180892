#include "darklabel/ops.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <thread>

#include "darklabel/csv.hpp"
#include "darklabel/error.hpp"
#include "darklabel/evaluation.hpp"
#include "darklabel/optimizer.hpp"
#include "darklabel/sampling.hpp"
#include "darklabel/text.hpp"
#include "darklabel/workbook.hpp"

namespace fs = std::filesystem;

namespace darklabel {

const std::vector<OpSpec>& op_inventory() {
  static const std::vector<OpSpec> ops = {
      {"workbook.create", "POST", "/workbooks", "init", true},
      {"workbook.get", "GET", "/workbooks/{id}", "show", false},
      {"dataset.import", "POST", "/workbooks/{id}/dataset:import", "import", true},
      {"dataset.index", "POST", "/workbooks/{id}/dataset:index", "index", true},
      {"context.get", "GET", "/workbooks/{id}/context", "context show", false},
      {"context.put", "PUT", "/workbooks/{id}/context", "context set", true},
      {"rules.get", "GET", "/workbooks/{id}/rules", "rules show", false},
      {"rules.put", "PUT", "/workbooks/{id}/rules", "rules set", true},
      {"rules.remove", "DELETE", "/workbooks/{id}/rules", "rules remove", true},
      {"shots.get", "GET", "/workbooks/{id}/shots", "shots show", false},
      {"shots.add", "POST", "/workbooks/{id}/shots", "shots add", true},
      {"sample.get", "GET", "/workbooks/{id}/sample", "sample show", false},
      {"sample.random", "POST", "/workbooks/{id}/sample", "sample random", true},
      {"sample.sequential", "POST", "/workbooks/{id}/sample", "sample seq", true},
      {"sample.clear", "POST", "/workbooks/{id}/sample", "sample clear", true},
      {"sample.pin", "POST", "/workbooks/{id}/sample", "sample pin", true},
      {"annotate", "POST", "/workbooks/{id}/annotate", "annotate", true},
      {"progress", "GET", "/workbooks/{id}/progress", "progress", false},
      {"tasks.list", "GET", "/workbooks/{id}/tasks", "tasks list", false},
      {"tasks.get", "GET", "/workbooks/{id}/tasks/{n}", "tasks show", false},
      {"tasks.export", "GET", "/workbooks/{id}/tasks/{n}/export", "export", false},
      {"tasks.validate", "POST", "/workbooks/{id}/tasks/{n}/validate", "validate", true},
      {"tasks.promote", "POST", "/workbooks/{id}/tasks/{n}/promote-shots", "promote", true},
      {"evaluate.session", "POST", "/workbooks/{id}/evaluate", "eval session", false},
      {"evaluate.rules", "POST", "/workbooks/{id}/evaluate", "eval rules", false},
      {"evaluations.get", "GET", "/workbooks/{id}/evaluations/{k}", "eval show", false},
      {"optimize", "POST", "/workbooks/{id}/optimize", "optimize", true},
  };
  return ops;
}

const OpSpec& op_spec(const std::string& name) {
  for (const auto& op : op_inventory())
    if (op.name == name) return op;
  throw Error(ErrorCode::BadRequest, "unknown operation", name);
}

namespace {

template <typename T>
std::optional<T> opt_param(const Json& p, const char* key) {
  if (!p.is_object()) return std::nullopt;
  auto it = p.find(key);
  if (it == p.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::BadRequest, "parameter has the wrong type", key);
  }
}

template <typename T>
T req_param(const Json& p, const char* key) {
  auto v = opt_param<T>(p, key);
  if (!v) throw Error(ErrorCode::BadRequest, "missing parameter", key);
  return *v;
}

Provider& need_provider(const OpEnv& env) {
  if (!env.provider) throw Error(ErrorCode::InvalidConfig, "no provider configured");
  return *env.provider;
}

GoldSet gold_from(const Json& params, const LabelScale& scale) {
  if (auto text = opt_param<std::string>(params, "gold_csv")) return GoldSet::from_csv(*text, scale);
  if (auto path = opt_param<std::string>(params, "gold_path"))
    return GoldSet::from_csv(csv::read_file(*path), scale);
  throw Error(ErrorCode::BadRequest, "missing parameter", "gold_csv");
}

std::vector<const TaskRecord*> selected_tasks(const Workbook& wb, const Json& params) {
  std::vector<const TaskRecord*> out;
  if (auto numbers = opt_param<std::vector<std::int64_t>>(params, "task_numbers")) {
    for (auto n : *numbers) out.push_back(&find_task(wb, n));
  } else {
    for (const auto& t : wb.tasks) out.push_back(&t);
  }
  return out;
}

Json context_json(const Workbook& wb) {
  Json out = Json::array();
  for (const auto& c : wb.context) out.push_back(c);
  return out;
}

Json sample_json(const Workbook& wb) {
  return Json{{"size", wb.working_sample.size()}, {"working_sample", wb.working_sample}};
}

Json dashboard_json(const Workbook& wb) {
  Json rows = Json::array();
  for (const auto& r : dashboard(wb))
    rows.push_back({{"task_number", r.task_number},
                    {"created_at", r.created_at},
                    {"prompt_digest", r.prompt_digest},
                    {"total_cost", r.total_cost}});
  return rows;
}

Json session_json(const SessionEvaluation& eval) {
  Json rows = Json::array();
  for (const auto& r : eval.rows) {
    Json preds = Json::array();
    for (const auto& p : r.predictions) preds.push_back(p ? Json(*p) : Json(nullptr));
    rows.push_back({{"iteration", r.iteration},
                    {"acc", r.acc},
                    {"mse", r.mse ? Json(*r.mse) : Json(nullptr)},
                    {"excluded", r.excluded},
                    {"improved_acc", r.improved_acc},
                    {"improved_mse", r.improved_mse},
                    {"parse_failure_rate", r.parse_failure_rate},
                    {"predictions", std::move(preds)},
                    {"error", r.error ? Json(*r.error) : Json(nullptr)}});
  }
  return rows;
}

std::optional<bool> parse_flag(const std::string& cell, const char* column) {
  const auto v = text::to_lower(text::trim(cell));
  if (v.empty()) return std::nullopt;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::BadRequest, "expected true or false", column);
}

std::vector<std::pair<std::int64_t, ValidationUpdate>> updates_from(const Json& params) {
  std::vector<std::pair<std::int64_t, ValidationUpdate>> out;
  auto one = [](const Json& u) {
    ValidationUpdate v;
    v.human_label = opt_param<std::string>(u, "human_label");
    v.agree = opt_param<bool>(u, "agree");
    v.gold_shot = opt_param<bool>(u, "gold_shot");
    v.keep = opt_param<bool>(u, "keep");
    return std::pair{req_param<std::int64_t>(u, "data_id"), v};
  };
  if (auto csv_text = opt_param<std::string>(params, "csv")) {
    const auto table = csv::parse_table(*csv_text);
    const int id_col = table.column("data_id");
    if (id_col < 0) throw Error(ErrorCode::Csv, "validation CSV needs a data_id column");
    const int cols[4] = {table.column("human_label"), table.column("agree"),
                         table.column("gold_shot"), table.column("keep")};
    for (const auto& row : table.rows) {
      auto cell = [&](int c) { return c < 0 ? std::string() : row[static_cast<std::size_t>(c)]; };
      std::int64_t id = 0;
      try {
        id = std::stoll(cell(id_col));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Csv, "data_id is not an integer", cell(id_col));
      }
      ValidationUpdate v;
      if (auto label = std::string(text::trim(cell(cols[0]))); !label.empty()) v.human_label = label;
      v.agree = parse_flag(cell(cols[1]), "agree");
      v.gold_shot = parse_flag(cell(cols[2]), "gold_shot");
      v.keep = parse_flag(cell(cols[3]), "keep");
      out.emplace_back(id, v);
    }
  } else if (params.is_object() && params.contains("updates")) {
    if (!params["updates"].is_array())
      throw Error(ErrorCode::BadRequest, "parameter has the wrong type", "updates");
    for (const auto& u : params["updates"]) out.push_back(one(u));
  } else {
    out.push_back(one(params));
  }
  return out;
}

// Mirrors a tracker into <dir>/progress.json while a CLI annotation runs.
class ProgressFile {
 public:
  ProgressFile(const WorkbookDir& dir, ProgressTracker& tracker)
      : path_(dir.path() / "progress.json"), tracker_(tracker),
        worker_([this](std::stop_token st) {
          while (!st.stop_requested()) {
            write();
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
          }
        }) {}
  ~ProgressFile() {
    worker_.request_stop();
    worker_.join();
    write();
  }

 private:
  void write() {
    try {
      const auto tmp = path_.string() + ".tmp";
      csv::write_file(tmp, progress_to_json(tracker_.snapshot()).dump() + "\n");
      fs::rename(tmp, path_);
    } catch (const std::exception&) {
    }
  }

  fs::path path_;
  ProgressTracker& tracker_;
  std::jthread worker_;
};

struct Call {
  Workbook& wb;
  const WorkbookDir& dir;
  const Json& params;
  OpEnv& env;
  bool dirty = false;
};

using Handler = std::function<Json(Call&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"workbook.get", [](Call& c) { return workbook_to_json(c.wb); }},
      {"dataset.import",
       [](Call& c) {
         const auto n = import_dataset(c.wb, parse_dataset_csv(req_param<std::string>(c.params, "csv")));
         c.dirty = true;
         return Json{{"imported", n}, {"total", c.wb.dataset.size()}};
       }},
      {"dataset.index",
       [](Call& c) {
         const auto n = index_data_ids(c.wb);
         c.dirty = true;
         return Json{{"indexed", n}};
       }},
      {"context.get", [](Call& c) { return Json{{"context", context_json(c.wb)}}; }},
      {"context.put",
       [](Call& c) {
         const auto answers = req_param<Json>(c.params, "answers");
         if (!answers.is_object())
           throw Error(ErrorCode::BadRequest, "answers must map question ids to text", "answers");
         for (const auto& [q, a] : answers.items()) {
           if (!a.is_string()) throw Error(ErrorCode::BadRequest, "answer must be a string", q);
           set_context_answer(c.wb, question_id_from_string(q), a.get<std::string>());
         }
         c.dirty = true;
         return Json{{"context", context_json(c.wb)}};
       }},
      {"rules.get",
       [](Call& c) { return Json{{"rules", ordered_rules(c.wb.rulebook, c.wb.label_scale)}}; }},
      {"rules.put",
       [](Call& c) {
         upsert_rule(c.wb, req_param<std::string>(c.params, "label"),
                     req_param<std::string>(c.params, "rule_text"),
                     req_param<int>(c.params, "position"));
         c.dirty = true;
         return Json{{"rules", ordered_rules(c.wb.rulebook, c.wb.label_scale)}};
       }},
      {"rules.remove",
       [](Call& c) {
         remove_rule(c.wb, req_param<std::string>(c.params, "label"),
                     req_param<int>(c.params, "position"));
         c.dirty = true;
         return Json{{"rules", ordered_rules(c.wb.rulebook, c.wb.label_scale)}};
       }},
      {"shots.get", [](Call& c) { return Json{{"shots", c.wb.shots}}; }},
      {"shots.add",
       [](Call& c) {
         const bool added = add_shot(c.wb, req_param<std::string>(c.params, "text"),
                                     req_param<std::string>(c.params, "gold_label"));
         c.dirty = added;
         return Json{{"added", added}, {"shots", c.wb.shots}};
       }},
      {"sample.get", [](Call& c) { return sample_json(c.wb); }},
      {"sample.random",
       [](Call& c) {
         const auto n = req_param<std::int64_t>(c.params, "n");
         if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be positive", std::to_string(n));
         random_sample(c.wb, static_cast<std::size_t>(n),
                       opt_param<std::uint64_t>(c.params, "seed").value_or(c.env.default_seed));
         c.dirty = true;
         return sample_json(c.wb);
       }},
      {"sample.sequential",
       [](Call& c) {
         sequential_sample(c.wb, {req_param<std::string>(c.params, "from"),
                                  req_param<std::string>(c.params, "to")});
         c.dirty = true;
         return sample_json(c.wb);
       }},
      {"sample.clear",
       [](Call& c) {
         clear_sample(c.wb);
         c.dirty = true;
         return sample_json(c.wb);
       }},
      {"sample.pin",
       [](Call& c) {
         set_pin(c.wb, req_param<std::int64_t>(c.params, "data_id"),
                 opt_param<bool>(c.params, "pinned").value_or(true));
         c.dirty = true;
         return sample_json(c.wb);
       }},
      {"annotate",
       [](Call& c) {
         auto& provider = need_provider(c.env);
         const auto options = annotation_options(c.params, c.env);
         std::int64_t n = 0;
         if (c.env.progress) {
           n = start_annotation(c.wb, provider, options, c.env.progress);
         } else {
           ProgressTracker tracker;
           ProgressFile mirror(c.dir, tracker);
           n = start_annotation(c.wb, provider, options, &tracker);
         }
         c.dirty = true;
         const auto& task = find_task(c.wb, n);
         return Json{{"task_number", n},
                     {"instances", task.results.size()},
                     {"total_cost", task.total_cost},
                     {"usage", task.total_usage},
                     {"usage_estimated", task.usage_estimated}};
       }},
      {"progress",
       [](Call& c) {
         if (c.env.progress) return progress_to_json(c.env.progress->snapshot());
         const auto file = c.dir.path() / "progress.json";
         if (!fs::exists(file)) return progress_to_json({});
         return Json::parse(csv::read_file(file.string()));
       }},
      {"tasks.list", [](Call& c) { return Json{{"dashboard", dashboard_json(c.wb)}}; }},
      {"tasks.get",
       [](Call& c) {
         return Json(display_view(find_task(c.wb, req_param<std::int64_t>(c.params, "task_number"))));
       }},
      {"tasks.export",
       [](Call& c) {
         return Json{{"csv", export_task_csv(find_task(
                                 c.wb, req_param<std::int64_t>(c.params, "task_number")))}};
       }},
      {"tasks.validate",
       [](Call& c) {
         const auto task = req_param<std::int64_t>(c.params, "task_number");
         const auto updates = updates_from(c.params);
         Workbook staged = c.wb;
         for (const auto& [id, u] : updates) record_validation(staged, task, id, u);
         c.wb = std::move(staged);
         c.dirty = true;
         return Json{{"updated", updates.size()}};
       }},
      {"tasks.promote",
       [](Call& c) {
         const auto r = promote_gold_shots(c.wb, req_param<std::int64_t>(c.params, "task_number"));
         c.dirty = true;
         return Json{{"promoted", r.promoted},
                     {"duplicates", r.duplicates},
                     {"skipped_unlabeled", r.skipped_unlabeled}};
       }},
      {"evaluate.session",
       [](Call& c) {
         auto& provider = need_provider(c.env);
         const auto gold = gold_from(c.params, c.wb.label_scale);
         std::vector<NamedBundle> bundles;
         for (const auto* t : selected_tasks(c.wb, c.params))
           bundles.push_back({iteration_name(bundles.size()), t->prompt_bundle});
         const auto eval = evaluate_session(bundles, gold, provider, annotation_options(c.params, c.env));
         Json doc{{"kind", "session"},
                  {"rows", session_json(eval)},
                  {"report_csv", session_report_csv(eval)}};
         doc["evaluation"] = c.dir.save_evaluation(doc);
         return doc;
       }},
      {"evaluate.rules",
       [](Call& c) {
         std::vector<PromptBundle> bundles;
         for (const auto* t : selected_tasks(c.wb, c.params)) bundles.push_back(t->prompt_bundle);
         const auto report = rule_similarity_report(bundles, TrigramEmbedder());
         Json pairs = Json::array();
         for (const auto& p : report.pairs)
           pairs.push_back({{"from", p.from},
                            {"to", p.to},
                            {"edit_similarity", p.edit_similarity},
                            {"semantic_similarity", p.semantic_similarity}});
         Json doc{{"kind", "rules"},
                  {"pairs", std::move(pairs)},
                  {"report_csv", rule_similarity_csv(report)}};
         doc["evaluation"] = c.dir.save_evaluation(doc);
         return doc;
       }},
      {"evaluations.get",
       [](Call& c) {
         const auto k = req_param<std::int64_t>(c.params, "k");
         if (k < 1) throw Error(ErrorCode::UnknownEvaluation, "no such evaluation", std::to_string(k));
         auto doc = c.dir.load_evaluation(static_cast<std::size_t>(k));
         doc["evaluation"] = k;
         return doc;
       }},
      {"optimize",
       [](Call& c) {
         auto& provider = need_provider(c.env);
         if (c.wb.tasks.empty())
           throw Error(ErrorCode::UnknownTask, "optimization starts from the latest task's prompt");
         const auto& base = c.wb.tasks.back().prompt_bundle;
         OptimizationConfig config;
         config.max_demos = opt_param<std::size_t>(c.params, "max_demos").value_or(config.max_demos);
         config.num_candidate_sets =
             opt_param<std::size_t>(c.params, "candidates").value_or(config.num_candidate_sets);
         config.dev_fraction = opt_param<double>(c.params, "dev").value_or(config.dev_fraction);
         config.seed = opt_param<std::uint64_t>(c.params, "seed").value_or(c.env.default_seed);
         const auto options = annotation_options(c.params, c.env);
         const auto result = bootstrap_fewshot(base, collect_validated(c.wb), provider, config, options);

         std::string report = csv::format_row({"metric", "value"});
         auto metric = [&](const char* name, double v) { report += csv::format_row({name, format_metric(v)}); };
         metric("baseline_dev_acc", result.baseline_dev_acc);
         metric("dev_acc", result.dev_acc);
         report += csv::format_row({"demos", std::to_string(result.demos.size())});
         report += csv::format_row({"candidates", std::to_string(result.candidates.size())});
         Json out{{"dev_acc", result.dev_acc},
                  {"baseline_dev_acc", result.baseline_dev_acc},
                  {"demos", result.demos},
                  {"train_size", result.train.size()},
                  {"dev_size", result.dev.size()},
                  {"candidates", result.candidates.size()},
                  {"candidate_sets", result.candidate_sets}};
         if (c.params.is_object() && (c.params.contains("gold_csv") || c.params.contains("gold_path"))) {
           const auto r = optimize_report(base, result.optimized, gold_from(c.params, c.wb.label_scale),
                                          provider, options);
           metric("acc_before", r.acc_before);
           metric("acc_after", r.acc_after);
           report += csv::format_row({"mse_before", r.mse_before ? format_metric(*r.mse_before) : ""});
           report += csv::format_row({"mse_after", r.mse_after ? format_metric(*r.mse_after) : ""});
           out["report"] = {{"acc_before", r.acc_before},
                            {"acc_after", r.acc_after},
                            {"mse_before", r.mse_before ? Json(*r.mse_before) : Json(nullptr)},
                            {"mse_after", r.mse_after ? Json(*r.mse_after) : Json(nullptr)}};
         }
         std::size_t added = 0;
         if (opt_param<bool>(c.params, "apply").value_or(false)) {
           for (const auto& d : result.demos) added += add_shot(c.wb, d.text, d.gold_label) ? 1 : 0;
           c.dirty = added > 0;
         }
         out["applied"] = added;
         out["report_csv"] = report;
         return out;
       }},
  };
  return table;
}

}  // namespace

AnnotationOptions annotation_options(const Json& params, const OpEnv& env) {
  AnnotationOptions o = env.annotation;
  if (auto v = opt_param<bool>(params, "show_explanations")) o.show_explanations = *v;
  if (auto v = opt_param<int>(params, "concurrency")) {
    if (*v < 1) throw Error(ErrorCode::InvalidConfig, "concurrency must be at least 1");
    o.max_in_flight = *v;
  }
  if (auto v = opt_param<int>(params, "max_retries")) {
    if (*v < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be non-negative");
    o.max_retries = *v;
  }
  return o;
}

Json execute_op(const std::string& op, const WorkbookDir& dir, const Json& params, OpEnv& env) {
  const auto& spec = op_spec(op);
  if (op == "workbook.create") {
    if (dir.exists()) throw Error(ErrorCode::WorkbookExists, "workbook already exists", dir.path().string());
    auto scale = sentiment_scale();
    if (auto labels = opt_param<std::vector<std::string>>(params, "labels")) scale = LabelScale(*labels);
    const auto name = opt_param<std::string>(params, "name").value_or(dir.path().filename().string());
    const auto wb = create_workbook(name, scale);
    dir.save(wb);
    dir.log_action(env.actor, op, params);
    return Json{{"name", wb.name}, {"label_scale", wb.label_scale}};
  }
  auto wb = dir.load();
  Call call{wb, dir, params, env};
  auto result = handlers().at(op)(call);
  if (call.dirty) dir.save(wb);
  if (spec.method != "GET") dir.log_action(env.actor, op, params);
  return result;
}

std::string export_task_csv(const TaskRecord& task) {
  std::string out = csv::format_row({"data_id", "group_id", "text", "llm_label", "llm_explanation",
                                     "human_label", "agree", "gold_shot", "keep"});
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  for (const auto& r : task.results) {
    out += csv::format_row({std::to_string(r.data_id), r.group_id, r.text, r.llm_label.value_or(""),
                            task.show_explanations ? r.llm_explanation.value_or("") : "",
                            r.human_label.value_or(""), b(r.agree), b(r.gold_shot_flag), b(r.keep_flag)});
  }
  return out;
}

std::vector<ImportRecord> parse_dataset_csv(const std::string& csv_text) {
  const auto table = csv::parse_table(csv_text);
  const int group_col = table.column("group_id");
  const int text_col = table.column("text");
  if (group_col < 0 || text_col < 0)
    throw Error(ErrorCode::Csv, "dataset CSV needs columns group_id,text");
  std::vector<ImportRecord> records;
  for (const auto& row : table.rows) {
    ImportRecord rec;
    rec.group_id = row[static_cast<std::size_t>(group_col)];
    rec.text = row[static_cast<std::size_t>(text_col)];
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (static_cast<int>(i) != group_col && static_cast<int>(i) != text_col)
        rec.extras.emplace_back(table.header[i], row[i]);
    records.push_back(std::move(rec));
  }
  return records;
}

Json progress_to_json(const ProgressState& state) {
  return Json{{"phase", to_string(state.phase)},
              {"done", state.done},
              {"total", state.total},
              {"reason", state.reason},
              {"notification", notification_text(state)}};
}

}  // namespace darklabel
