#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace darklabel {

/// Ordered set of labels. A label's ordinal is its 1-based position, which is
/// what MSE measures distances over.
class LabelScale {
 public:
  LabelScale() = default;
  /// Throws DuplicateLabel or InvalidLabelScale (fewer than two labels, empty name).
  explicit LabelScale(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(std::string_view label) const noexcept;
  /// 1..N; throws UnknownLabel.
  int ordinal(std::string_view label) const;
  const std::string& at_ordinal(int ordinal) const;
  /// Case-insensitive lookup returning the canonical spelling.
  std::optional<std::string> canonical(std::string_view label) const;

  bool operator==(const LabelScale&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// The five-point sentiment scheme, ordered from most negative (ordinal 1)
/// to most positive (ordinal 5).
LabelScale sentiment_scale();

struct DatasetRow {
  std::optional<std::int64_t> data_id;
  std::string group_id;
  std::string text;
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const DatasetRow&) const = default;
};

enum class QuestionId { Q1, Q2, Q3, Q4, Q5, Q6_TASK_TYPE };

const char* to_string(QuestionId id) noexcept;
QuestionId question_id_from_string(std::string_view s);

struct ContextAnswer {
  QuestionId question_id = QuestionId::Q1;
  std::string question_text;
  std::string answer;

  bool operator==(const ContextAnswer&) const = default;
};

struct LabelRule {
  std::string label;
  std::string rule_text;
  int position = 0;

  bool operator==(const LabelRule&) const = default;
};

struct ShotSource {
  enum class Kind { Manual, Promoted };
  Kind kind = Kind::Manual;
  std::int64_t task_number = 0;
  std::int64_t data_id = 0;

  static ShotSource manual() { return {}; }
  static ShotSource promoted(std::int64_t task, std::int64_t id) {
    return {Kind::Promoted, task, id};
  }
  bool operator==(const ShotSource&) const = default;
};

struct Shot {
  std::string text;
  std::string gold_label;
  ShotSource source;

  bool operator==(const Shot&) const = default;
};

struct SampleEntry {
  std::int64_t data_id = 0;
  std::string group_id;
  std::string text;
  bool keep_pin = false;

  bool operator==(const SampleEntry&) const = default;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  Usage& operator+=(const Usage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  friend Usage operator+(Usage a, const Usage& b) { return a += b; }
  bool operator==(const Usage&) const = default;
};

struct InstructionalPrompt {
  std::string text;
  std::string generated_at;
  std::string source_context_digest;

  bool operator==(const InstructionalPrompt&) const = default;
};

/// Everything that determines an annotation prompt, frozen at task start.
struct PromptBundle {
  InstructionalPrompt instructional;
  std::vector<LabelRule> rules_snapshot;
  std::vector<Shot> shots_snapshot;
  LabelScale label_scale;

  bool operator==(const PromptBundle&) const = default;
};

struct AnnotationResult {
  std::int64_t data_id = 0;
  std::string group_id;
  std::string text;
  std::optional<std::string> llm_label;
  std::optional<std::string> llm_explanation;
  std::optional<std::string> parse_error;
  std::optional<std::string> human_label;
  bool agree = false;
  bool gold_shot_flag = false;
  bool keep_flag = false;

  bool operator==(const AnnotationResult&) const = default;
};

struct TaskRecord {
  std::int64_t task_number = 0;
  std::string created_at;
  PromptBundle prompt_bundle;
  bool show_explanations = true;
  std::string model;
  std::vector<AnnotationResult> results;
  double total_cost = 0.0;
  Usage total_usage;
  bool usage_estimated = false;

  bool operator==(const TaskRecord&) const = default;
};

struct Workbook {
  std::string name;
  LabelScale label_scale;
  std::vector<DatasetRow> dataset;
  std::vector<ContextAnswer> context;
  std::vector<LabelRule> rulebook;
  std::vector<Shot> shots;
  std::vector<SampleEntry> working_sample;
  std::vector<TaskRecord> tasks;
  std::optional<InstructionalPrompt> instruction_cache;

  std::int64_t next_task_number() const {
    return static_cast<std::int64_t>(tasks.size()) + 1;
  }
  bool operator==(const Workbook&) const = default;
};

}  // namespace darklabel
