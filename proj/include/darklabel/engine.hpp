#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "darklabel/llm.hpp"
#include "darklabel/prompt.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

// ---------------------------------------------------------------------------
// Progress

enum class Phase {
  Idle,
  DataIndexing,
  DataSampling,
  GeneratingInstructionalPrompt,
  Annotating,
  Done,
  Failed,
};

const char* to_string(Phase phase) noexcept;

struct ProgressState {
  Phase phase = Phase::Idle;
  std::size_t done = 0;
  std::size_t total = 0;
  std::string reason;  // set for Failed

  bool operator==(const ProgressState&) const = default;
};

/// Sidebar notification text, e.g. "Generating the Instructional Prompt" or
/// "Annotating (3/10)".
std::string notification_text(const ProgressState& state);

/// Thread-safe progress cell; readers get snapshots.
class ProgressTracker {
 public:
  ProgressState snapshot() const {
    std::lock_guard lock(mu_);
    return state_;
  }
  void set(ProgressState s) {
    std::lock_guard lock(mu_);
    state_ = std::move(s);
  }
  void set_phase(Phase p) { set({p, 0, 0, {}}); }
  void advance(std::size_t by) {
    std::lock_guard lock(mu_);
    state_.done += by;
  }

 private:
  mutable std::mutex mu_;
  ProgressState state_;
};

// ---------------------------------------------------------------------------
// Response parsing

struct ParsedAnswer {
  std::string label;
  std::string explanation;

  bool operator==(const ParsedAnswer&) const = default;
};

/// Tolerates case-insensitive keywords, optional brackets around the label and
/// surrounding whitespace. Returns the label in its canonical spelling.
/// Throws NoAnswerSection or UnknownLabel(raw token).
ParsedAnswer parse_single_response(std::string_view text, const LabelScale& labels);

struct FragmentResult {
  std::size_t index = 0;  // 1-based instance position within the group
  std::optional<ParsedAnswer> answer;
  std::optional<Error> error;
};

struct MultiParse {
  std::vector<FragmentResult> results;  // one per expected index, in order
  std::size_t discarded_fragments = 0;
};

/// Splits on lines of three or more '='. Fragments carrying a
/// `data-instance-k` tag go to index k; untagged fragments fill the remaining
/// indices in order. Missing indices carry MissingFragment.
MultiParse parse_multi_response(std::string_view text, std::size_t expected,
                                const LabelScale& labels);

// ---------------------------------------------------------------------------
// Retry

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::uint64_t jitter_seed = 0;
  /// Defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;

  /// Full jitter: uniform in [0, base * factor^attempt].
  std::chrono::milliseconds backoff(int attempt, std::uint64_t stream) const;
};

struct GroupOutcome {
  std::vector<FragmentResult> results;
  Usage usage;
  double cost = 0.0;
  int attempts = 0;
  bool usage_estimated = false;
  std::optional<Error> failure;  // provider error after the last attempt
};

/// Sends `prompt` for a group of `group_size` instances, re-issuing on
/// Transport, RateLimited, 5xx ProviderError, or any unparsed fragment, for at
/// most `attempt_budget` attempts. The last attempt's results are returned.
GroupOutcome retry_group(Provider& provider, const ChatRequest& request, std::size_t group_size,
                         const LabelScale& labels, int attempt_budget, const RetryPolicy& policy,
                         const CostTable& costs, std::uint64_t stream = 0);

// ---------------------------------------------------------------------------
// Annotation

struct AnnotationOptions {
  bool show_explanations = true;
  int max_in_flight = 4;
  int max_retries = 1;
  double temperature = 0.0;
  std::optional<int> max_output_tokens;
  CostTable costs = CostTable::defaults();
  RetryPolicy retry;
};

struct BatchOutcome {
  std::vector<AnnotationResult> results;  // input order
  Usage usage;
  double cost = 0.0;
  std::size_t requests = 0;
  bool usage_estimated = false;
};

/// Groups `instances` by group id (first-appearance order), sends one prompt
/// per group with at most `max_in_flight` concurrent requests, and returns
/// results in input order. Per-group failures are recorded as parse_error.
BatchOutcome annotate_instances(const PromptBundle& bundle,
                                const std::vector<PromptInstance>& instances, Provider& provider,
                                const AnnotationOptions& options,
                                ProgressTracker* progress = nullptr);

/// Returns the cached instructional prompt when the context is unchanged,
/// otherwise asks the provider for a new one. Usage of the call is added to
/// `usage` and `cost`.
InstructionalPrompt obtain_instruction(const Workbook& wb, Provider& provider,
                                       const AnnotationOptions& options, Usage& usage,
                                       double& cost, bool& fresh);

/// Checks every precondition of a task start: non-empty sample, rulebook,
/// answered context, priced model.
void check_annotation_preconditions(const Workbook& wb, const Provider& provider,
                                    const AnnotationOptions& options);

struct AnnotationOutcome {
  TaskRecord task;  // task_number assigned at commit
  InstructionalPrompt instruction;
};

/// Runs a task against a snapshot of the workbook without mutating it. Progress
/// ends in Annotating with done == total; Done is set once the task is committed.
AnnotationOutcome run_annotation(const Workbook& snapshot, Provider& provider,
                                 const AnnotationOptions& options,
                                 ProgressTracker* progress = nullptr);

/// Appends the task and refreshes the instruction cache. Returns the task number.
std::int64_t commit_annotation(Workbook& wb, AnnotationOutcome outcome);

/// run_annotation + commit_annotation, then marks progress Done.
std::int64_t start_annotation(Workbook& wb, Provider& provider, const AnnotationOptions& options,
                              ProgressTracker* progress = nullptr);

/// Copy of `task` with explanations removed when the task hides them.
TaskRecord display_view(const TaskRecord& task);

}  // namespace darklabel
