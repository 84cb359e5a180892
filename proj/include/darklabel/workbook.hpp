#pragma once

#include <string>
#include <vector>

#include "darklabel/types.hpp"

namespace darklabel {

/// Verbatim text of the five task-context questions plus the fixed task-type
/// question.
const std::string& question_text(QuestionId id);

Workbook create_workbook(std::string name, LabelScale label_scale);

struct ImportRecord {
  std::string group_id;
  std::string text;
  std::vector<std::pair<std::string, std::string>> extras;
};

/// Appends unindexed rows. All-or-nothing: an empty text anywhere rejects the
/// batch with RowRejected (details = 1-based record index).
std::size_t import_dataset(Workbook& wb, const std::vector<ImportRecord>& records);

/// Renumbers every row to its 1-based position. Renumbering after inserting
/// rows changes existing ids.
std::size_t index_data_ids(Workbook& wb);

void set_context_answer(Workbook& wb, QuestionId id, std::string answer);
const ContextAnswer& context_answer(const Workbook& wb, QuestionId id);

void upsert_rule(Workbook& wb, const std::string& label, std::string rule_text, int position);
void remove_rule(Workbook& wb, const std::string& label, int position);
/// Rules ordered by label-scale order, then position.
std::vector<LabelRule> ordered_rules(const std::vector<LabelRule>& rules, const LabelScale& scale);

/// Returns false when (text, gold_label) already exists.
bool add_shot(Workbook& wb, std::string text, std::string gold_label,
              ShotSource source = ShotSource::manual());

struct ValidationUpdate {
  std::optional<std::string> human_label;
  std::optional<bool> agree;
  std::optional<bool> gold_shot;
  std::optional<bool> keep;
};

/// Updates one AnnotationResult. Setting `keep` also pins (or unpins) the
/// instance in the working sample.
void record_validation(Workbook& wb, std::int64_t task_number, std::int64_t data_id,
                       const ValidationUpdate& update);

/// Pins or unpins a working-sample entry, adding the row when pinning an
/// instance that is not currently sampled.
void set_pin(Workbook& wb, std::int64_t data_id, bool pinned);

struct PromotionResult {
  std::size_t promoted = 0;
  std::size_t duplicates = 0;
  std::vector<std::int64_t> skipped_unlabeled;
};

PromotionResult promote_gold_shots(Workbook& wb, std::int64_t task_number);

struct DashboardRow {
  std::int64_t task_number = 0;
  std::string created_at;
  std::string prompt_digest;
  double total_cost = 0.0;
};

std::vector<DashboardRow> dashboard(const Workbook& wb);

TaskRecord& find_task(Workbook& wb, std::int64_t task_number);
const TaskRecord& find_task(const Workbook& wb, std::int64_t task_number);
const DatasetRow& find_row(const Workbook& wb, std::int64_t data_id);

/// Checks the cross-field invariants (unique ids, labels in scale, contiguous
/// task numbers). Throws MalformedWorkbook on violation.
void validate_workbook(const Workbook& wb);

}  // namespace darklabel
