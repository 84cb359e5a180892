#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "darklabel/engine.hpp"
#include "darklabel/llm.hpp"
#include "darklabel/persistence.hpp"
#include "darklabel/store.hpp"
#include "darklabel/workbook.hpp"

namespace darklabel {

/// One workbook operation as exposed on both surfaces.
struct OpSpec {
  std::string name;    // e.g. "sample.random"
  std::string method;  // HTTP method
  std::string path;    // HTTP path template, {id} {n} {k} placeholders
  std::string cli;     // CLI subcommand path, e.g. "sample random"
  bool mutates = false;
};

/// Every workbook operation, in workflow order.
const std::vector<OpSpec>& op_inventory();
const OpSpec& op_spec(const std::string& name);

struct OpEnv {
  std::shared_ptr<Provider> provider;
  AnnotationOptions annotation;
  std::uint64_t default_seed = 0;
  std::string actor = "cli";
  ProgressTracker* progress = nullptr;
};

/// Applies per-call overrides (`show_explanations`, `concurrency`,
/// `max_retries`) from `params` to the environment defaults.
AnnotationOptions annotation_options(const Json& params, const OpEnv& env);

/// Runs one operation against the workbook stored in `dir`: loads it, applies
/// the op, saves when the op mutates, and appends to the action log.
/// `params` mirrors the module op's parameters; the result is JSON.
Json execute_op(const std::string& op, const WorkbookDir& dir, const Json& params, OpEnv& env);

/// Task results as CSV
/// `data_id,group_id,text,llm_label,llm_explanation,human_label,agree,gold_shot,keep`.
/// Explanations are left empty when the task hides them.
std::string export_task_csv(const TaskRecord& task);

/// Dataset CSV (`group_id,text[,extras...]`) to import records.
std::vector<ImportRecord> parse_dataset_csv(const std::string& csv_text);

Json progress_to_json(const ProgressState& state);

}  // namespace darklabel
