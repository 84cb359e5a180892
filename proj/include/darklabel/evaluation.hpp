#pragma once

#include <optional>
#include <string>
#include <vector>

#include "darklabel/engine.hpp"
#include "darklabel/metrics.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

struct GoldItem {
  std::string text;
  std::string gold_label;
};

struct GoldSet {
  std::vector<GoldItem> items;
  LabelScale label_scale;

  /// Throws InvalidGoldSet (unknown label, duplicate text, empty).
  void validate() const;
  /// CSV with columns `text,gold_label`.
  static GoldSet from_csv(const std::string& csv_text, const LabelScale& scale);
};

struct NamedBundle {
  std::string name;
  PromptBundle bundle;
};

/// "Initial", "Revision 1", "Revision 2", ...
std::string iteration_name(std::size_t index);

/// One bundle per task, in task order.
std::vector<NamedBundle> bundles_from_tasks(const Workbook& wb);

struct SessionRow {
  std::string iteration;
  double acc = 0.0;
  std::optional<double> mse;  // unset when every prediction failed to parse
  std::size_t excluded = 0;
  bool improved_acc = false;
  bool improved_mse = false;
  double parse_failure_rate = 0.0;
  std::vector<Prediction> predictions;
  std::optional<std::string> error;
};

struct SessionEvaluation {
  std::vector<SessionRow> rows;
};

/// Replays every bundle over the gold set, one instance per request, and
/// flags rows that beat the Initial row (higher ACC, lower MSE).
SessionEvaluation evaluate_session(const std::vector<NamedBundle>& bundles, const GoldSet& gold,
                                   Provider& provider, const AnnotationOptions& options);

/// `iteration,acc,mse,excluded,improved_acc,improved_mse`
std::string session_report_csv(const SessionEvaluation& eval);

/// Rule texts joined by newlines, in label-scale order then position.
std::string concat_rules(const std::vector<LabelRule>& rules, const LabelScale& scale);

struct RuleSimilarityPair {
  std::size_t from = 0;  // 1-based bundle index
  std::size_t to = 0;
  double edit_similarity = 0.0;
  double semantic_similarity = 0.0;
};

struct RuleSimilarityReport {
  std::vector<RuleSimilarityPair> pairs;
};

/// Throws TooFewBundles.
RuleSimilarityReport rule_similarity_report(const std::vector<PromptBundle>& bundles,
                                            const Embedder& embedder);

/// `pair,edit_sim,semantic_sim`
std::string rule_similarity_csv(const RuleSimilarityReport& report);

/// Fixed six-decimal rendering used in report files.
std::string format_metric(double v);

}  // namespace darklabel
