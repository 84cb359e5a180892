#include "darklabel/workbook.hpp"

#include <algorithm>
#include <set>

#include "darklabel/error.hpp"
#include "darklabel/prompt.hpp"
#include "darklabel/text.hpp"

namespace darklabel {

// ---------------------------------------------------------------------------
// LabelScale

LabelScale::LabelScale(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2)
    throw Error(ErrorCode::InvalidLabelScale, "a label scale needs at least two labels");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (text::trim(l).empty())
      throw Error(ErrorCode::InvalidLabelScale, "label names must be non-empty");
    if (!seen.insert(l).second) throw Error(ErrorCode::DuplicateLabel, "duplicate label", l);
  }
}

bool LabelScale::contains(std::string_view label) const noexcept {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int LabelScale::ordinal(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw Error(ErrorCode::UnknownLabel, "label not in scale", std::string(label));
  return static_cast<int>(it - labels_.begin()) + 1;
}

const std::string& LabelScale::at_ordinal(int ordinal) const {
  if (ordinal < 1 || ordinal > static_cast<int>(labels_.size()))
    throw Error(ErrorCode::OutOfRange, "ordinal outside the label scale");
  return labels_[static_cast<std::size_t>(ordinal - 1)];
}

std::optional<std::string> LabelScale::canonical(std::string_view label) const {
  for (const auto& l : labels_)
    if (l == label) return l;
  for (const auto& l : labels_)
    if (text::iequals(l, label)) return l;
  return std::nullopt;
}

LabelScale sentiment_scale() {
  return LabelScale({"Extremely Negative", "Negative", "Neutral", "Positive",
                     "Extremely Positive"});
}

// ---------------------------------------------------------------------------
// Questions

const char* to_string(QuestionId id) noexcept {
  switch (id) {
    case QuestionId::Q1: return "Q1";
    case QuestionId::Q2: return "Q2";
    case QuestionId::Q3: return "Q3";
    case QuestionId::Q4: return "Q4";
    case QuestionId::Q5: return "Q5";
    case QuestionId::Q6_TASK_TYPE: return "Q6_TASK_TYPE";
  }
  return "?";
}

QuestionId question_id_from_string(std::string_view s) {
  for (auto id : {QuestionId::Q1, QuestionId::Q2, QuestionId::Q3, QuestionId::Q4, QuestionId::Q5,
                  QuestionId::Q6_TASK_TYPE}) {
    if (text::iequals(s, to_string(id))) return id;
  }
  if (text::iequals(s, "Q6")) return QuestionId::Q6_TASK_TYPE;
  throw Error(ErrorCode::UnknownQuestion, "unknown question id", std::string(s));
}

const std::string& question_text(QuestionId id) {
  static const std::string kQ1 =
      "What is the purpose of annotating this data? Common answers include gaining insight "
      "about something, wanting to compare something, wanting to create prompts, etc. Try to "
      "give us more details about your higher-level goal.";
  static const std::string kQ2 =
      "How do you want to use the annotated data? Common answers include further analysis, "
      "training an AI model, presenting it to people, or using it in some downstream tasks "
      "inside some computer system. Try to give us more details about the use cases of the "
      "annotated data.";
  static const std::string kQ3 =
      "What are these data? Please tell us more about the source and the characteristics of "
      "the data. For example, \"These are real-world product reviews written by Amazon users. "
      "We obtained this dataset by downloading it from Kaggle.\" or \"This is the transcript "
      "of interviews of our participants. Each interview is about 30 minutes long. The "
      "interview is about their experience in creative writing.\" or \"These are tweets "
      "posted on Twitter between Jan 2024 to March 2024.\"";
  static const std::string kQ4 =
      "What is the size of each data instance (each row)? For example, \"Each instance is a "
      "tweet.\", \"Each instance is one Amazon product review.\", or \"Each instance is one "
      "sentence from the interview transcript.\"";
  static const std::string kQ5 =
      "Is there anything particular you want us to mention in the prompt? We will add all the "
      "context you mentioned in this tab to the prompt for LLMs. Please mention anything you "
      "want the LLMs to be aware of.";
  static const std::string kQ6 = "Is it a single-class or multi-class labeling task? [required]";
  switch (id) {
    case QuestionId::Q1: return kQ1;
    case QuestionId::Q2: return kQ2;
    case QuestionId::Q3: return kQ3;
    case QuestionId::Q4: return kQ4;
    case QuestionId::Q5: return kQ5;
    case QuestionId::Q6_TASK_TYPE: return kQ6;
  }
  return kQ6;
}

// ---------------------------------------------------------------------------
// Workbook operations

Workbook create_workbook(std::string name, LabelScale label_scale) {
  if (label_scale.size() < 2)
    throw Error(ErrorCode::InvalidLabelScale, "a label scale needs at least two labels");
  Workbook wb;
  wb.name = std::move(name);
  wb.label_scale = std::move(label_scale);
  for (auto id : {QuestionId::Q1, QuestionId::Q2, QuestionId::Q3, QuestionId::Q4, QuestionId::Q5})
    wb.context.push_back({id, question_text(id), ""});
  wb.context.push_back(
      {QuestionId::Q6_TASK_TYPE, question_text(QuestionId::Q6_TASK_TYPE), "single-class"});
  return wb;
}

std::size_t import_dataset(Workbook& wb, const std::vector<ImportRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].text.empty())
      throw Error(ErrorCode::RowRejected, "row has empty text", std::to_string(i + 1));
  }
  for (const auto& r : records) wb.dataset.push_back({std::nullopt, r.group_id, r.text, r.extras});
  return records.size();
}

std::size_t index_data_ids(Workbook& wb) {
  if (wb.dataset.empty()) throw Error(ErrorCode::EmptyDataset, "dataset is empty");
  std::int64_t id = 1;
  for (auto& row : wb.dataset) row.data_id = id++;
  return wb.dataset.size();
}

void set_context_answer(Workbook& wb, QuestionId id, std::string answer) {
  if (id == QuestionId::Q6_TASK_TYPE)
    throw Error(ErrorCode::ReadOnlyQuestion, "the task-type question is fixed to single-class");
  for (auto& c : wb.context) {
    if (c.question_id == id) {
      c.answer = std::move(answer);
      return;
    }
  }
  wb.context.push_back({id, question_text(id), std::move(answer)});
}

const ContextAnswer& context_answer(const Workbook& wb, QuestionId id) {
  for (const auto& c : wb.context)
    if (c.question_id == id) return c;
  throw Error(ErrorCode::UnknownQuestion, "question missing from context", to_string(id));
}

void upsert_rule(Workbook& wb, const std::string& label, std::string rule_text, int position) {
  if (!wb.label_scale.contains(label))
    throw Error(ErrorCode::UnknownLabel, "label not in scale", label);
  if (text::trim(rule_text).empty())
    throw Error(ErrorCode::InvalidRule, "rule text must be non-empty");
  for (auto& r : wb.rulebook) {
    if (r.label == label && r.position == position) {
      r.rule_text = std::move(rule_text);
      return;
    }
  }
  wb.rulebook.push_back({label, std::move(rule_text), position});
}

void remove_rule(Workbook& wb, const std::string& label, int position) {
  if (!wb.label_scale.contains(label))
    throw Error(ErrorCode::UnknownLabel, "label not in scale", label);
  auto it = std::find_if(wb.rulebook.begin(), wb.rulebook.end(), [&](const LabelRule& r) {
    return r.label == label && r.position == position;
  });
  if (it == wb.rulebook.end())
    throw Error(ErrorCode::RemoveMissing, "no rule at that position",
                label + "#" + std::to_string(position));
  wb.rulebook.erase(it);
}

std::vector<LabelRule> ordered_rules(const std::vector<LabelRule>& rules, const LabelScale& scale) {
  std::vector<LabelRule> out = rules;
  auto rank = [&](const LabelRule& r) {
    return scale.contains(r.label) ? scale.ordinal(r.label) : static_cast<int>(scale.size()) + 1;
  };
  std::stable_sort(out.begin(), out.end(), [&](const LabelRule& a, const LabelRule& b) {
    const int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb;
    return a.position < b.position;
  });
  return out;
}

bool add_shot(Workbook& wb, std::string text, std::string gold_label, ShotSource source) {
  if (!wb.label_scale.contains(gold_label))
    throw Error(ErrorCode::UnknownLabel, "label not in scale", gold_label);
  for (const auto& s : wb.shots)
    if (s.text == text && s.gold_label == gold_label) return false;
  wb.shots.push_back({std::move(text), std::move(gold_label), source});
  return true;
}

TaskRecord& find_task(Workbook& wb, std::int64_t task_number) {
  for (auto& t : wb.tasks)
    if (t.task_number == task_number) return t;
  throw Error(ErrorCode::UnknownTask, "no such task", std::to_string(task_number));
}

const TaskRecord& find_task(const Workbook& wb, std::int64_t task_number) {
  return find_task(const_cast<Workbook&>(wb), task_number);
}

const DatasetRow& find_row(const Workbook& wb, std::int64_t data_id) {
  for (const auto& r : wb.dataset)
    if (r.data_id && *r.data_id == data_id) return r;
  throw Error(ErrorCode::UnknownDataId, "no such data id", std::to_string(data_id));
}

void set_pin(Workbook& wb, std::int64_t data_id, bool pinned) {
  for (auto& e : wb.working_sample) {
    if (e.data_id == data_id) {
      e.keep_pin = pinned;
      return;
    }
  }
  if (!pinned) return;
  const auto& row = find_row(wb, data_id);
  wb.working_sample.push_back({data_id, row.group_id, row.text, true});
}

void record_validation(Workbook& wb, std::int64_t task_number, std::int64_t data_id,
                       const ValidationUpdate& update) {
  auto& task = find_task(wb, task_number);
  auto it = std::find_if(task.results.begin(), task.results.end(),
                         [&](const AnnotationResult& r) { return r.data_id == data_id; });
  if (it == task.results.end())
    throw Error(ErrorCode::UnknownDataId, "data id not in task", std::to_string(data_id));
  if (update.human_label && !update.human_label->empty() &&
      !wb.label_scale.contains(*update.human_label))
    throw Error(ErrorCode::UnknownLabel, "label not in scale", *update.human_label);
  if (update.keep && *update.keep) {
    // Validate before mutating anything so a failure leaves the result untouched.
    bool sampled = std::any_of(wb.working_sample.begin(), wb.working_sample.end(),
                               [&](const SampleEntry& e) { return e.data_id == data_id; });
    if (!sampled) find_row(wb, data_id);
  }

  if (update.human_label) {
    if (update.human_label->empty())
      it->human_label.reset();
    else
      it->human_label = *update.human_label;
  }
  if (update.agree) it->agree = *update.agree;
  if (update.gold_shot) it->gold_shot_flag = *update.gold_shot;
  if (update.keep) {
    it->keep_flag = *update.keep;
    set_pin(wb, data_id, *update.keep);
  }
}

PromotionResult promote_gold_shots(Workbook& wb, std::int64_t task_number) {
  auto& task = find_task(wb, task_number);
  PromotionResult out;
  for (const auto& r : task.results) {
    if (!r.gold_shot_flag) continue;
    std::optional<std::string> label = r.human_label ? r.human_label : r.llm_label;
    if (!label) {
      out.skipped_unlabeled.push_back(r.data_id);
      continue;
    }
    if (add_shot(wb, r.text, *label, ShotSource::promoted(task_number, r.data_id)))
      ++out.promoted;
    else
      ++out.duplicates;
  }
  return out;
}

std::vector<DashboardRow> dashboard(const Workbook& wb) {
  std::vector<DashboardRow> rows;
  rows.reserve(wb.tasks.size());
  for (const auto& t : wb.tasks)
    rows.push_back({t.task_number, t.created_at, bundle_digest(t.prompt_bundle), t.total_cost});
  return rows;
}

void validate_workbook(const Workbook& wb) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::MalformedWorkbook, what); };
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < wb.dataset.size(); ++i) {
    const auto& row = wb.dataset[i];
    if (row.text.empty()) fail("dataset row with empty text");
    if (row.data_id && !ids.insert(*row.data_id).second) fail("duplicate data id");
  }
  for (const auto& r : wb.rulebook)
    if (!wb.label_scale.contains(r.label)) fail("rule label not in scale: " + r.label);
  std::set<std::pair<std::string, std::string>> shot_keys;
  for (const auto& s : wb.shots) {
    if (!wb.label_scale.contains(s.gold_label)) fail("shot label not in scale: " + s.gold_label);
    if (!shot_keys.insert({s.text, s.gold_label}).second) fail("duplicate shot");
  }
  for (std::size_t i = 0; i < wb.tasks.size(); ++i)
    if (wb.tasks[i].task_number != static_cast<std::int64_t>(i) + 1)
      fail("task numbers must be contiguous from 1");
}

}  // namespace darklabel
