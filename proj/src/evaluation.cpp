#include "darklabel/evaluation.hpp"

#include <cstdio>
#include <set>

#include "darklabel/csv.hpp"
#include "darklabel/error.hpp"
#include "darklabel/workbook.hpp"

namespace darklabel {

void GoldSet::validate() const {
  if (items.empty()) throw Error(ErrorCode::InvalidGoldSet, "gold set is empty");
  std::set<std::string> texts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!label_scale.contains(items[i].gold_label))
      throw Error(ErrorCode::InvalidGoldSet, "gold label not in scale", items[i].gold_label);
    if (!texts.insert(items[i].text).second)
      throw Error(ErrorCode::InvalidGoldSet, "duplicate gold text", std::to_string(i + 1));
  }
}

GoldSet GoldSet::from_csv(const std::string& csv_text, const LabelScale& scale) {
  const auto table = csv::parse_table(csv_text);
  const int text_col = table.column("text");
  const int label_col = table.column("gold_label");
  if (text_col < 0 || label_col < 0)
    throw Error(ErrorCode::InvalidGoldSet, "gold CSV needs columns text,gold_label");
  GoldSet g;
  g.label_scale = scale;
  for (const auto& row : table.rows)
    g.items.push_back({row[static_cast<std::size_t>(text_col)],
                       row[static_cast<std::size_t>(label_col)]});
  g.validate();
  return g;
}

std::string iteration_name(std::size_t index) {
  return index == 0 ? "Initial" : "Revision " + std::to_string(index);
}

std::vector<NamedBundle> bundles_from_tasks(const Workbook& wb) {
  std::vector<NamedBundle> out;
  for (std::size_t i = 0; i < wb.tasks.size(); ++i)
    out.push_back({iteration_name(i), wb.tasks[i].prompt_bundle});
  return out;
}

SessionEvaluation evaluate_session(const std::vector<NamedBundle>& bundles, const GoldSet& gold,
                                   Provider& provider, const AnnotationOptions& options) {
  if (bundles.empty()) throw Error(ErrorCode::TooFewBundles, "nothing to evaluate");
  gold.validate();
  std::vector<PromptInstance> instances;
  std::vector<std::string> gold_labels;
  for (std::size_t i = 0; i < gold.items.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    instances.push_back({id, "gold-" + std::to_string(id), gold.items[i].text});
    gold_labels.push_back(gold.items[i].gold_label);
  }

  SessionEvaluation eval;
  for (const auto& nb : bundles) {
    SessionRow row;
    row.iteration = nb.name;
    try {
      const auto batch = annotate_instances(nb.bundle, instances, provider, options);
      std::size_t failures = 0;
      for (const auto& r : batch.results) {
        row.predictions.push_back(r.llm_label);
        if (!r.llm_label) ++failures;
      }
      row.parse_failure_rate = static_cast<double>(failures) / static_cast<double>(instances.size());
      row.acc = accuracy(row.predictions, gold_labels);
      if (failures == instances.size()) {
        row.excluded = failures;
        row.error = batch.results.front().parse_error.value_or("no prediction parsed");
      } else {
        const auto m = mse(row.predictions, gold_labels, gold.label_scale);
        row.mse = m.mse;
        row.excluded = m.excluded;
      }
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
      row.excluded = instances.size();
      row.parse_failure_rate = 1.0;
    }
    eval.rows.push_back(std::move(row));
  }

  const auto& initial = eval.rows.front();
  for (std::size_t i = 1; i < eval.rows.size(); ++i) {
    auto& row = eval.rows[i];
    if (row.error && !row.mse) continue;
    row.improved_acc = !initial.error && row.acc > initial.acc;
    row.improved_mse = initial.mse && row.mse && *row.mse < *initial.mse;
  }
  return eval;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string session_report_csv(const SessionEvaluation& eval) {
  std::string out = csv::format_row(
      {"iteration", "acc", "mse", "excluded", "improved_acc", "improved_mse"});
  for (const auto& r : eval.rows) {
    out += csv::format_row({r.iteration, r.predictions.empty() ? "" : format_metric(r.acc),
                            r.mse ? format_metric(*r.mse) : "", std::to_string(r.excluded),
                            r.improved_acc ? "true" : "false", r.improved_mse ? "true" : "false"});
  }
  return out;
}

std::string concat_rules(const std::vector<LabelRule>& rules, const LabelScale& scale) {
  std::string out;
  bool first = true;
  for (const auto& r : ordered_rules(rules, scale)) {
    if (!first) out += '\n';
    out += r.rule_text;
    first = false;
  }
  return out;
}

RuleSimilarityReport rule_similarity_report(const std::vector<PromptBundle>& bundles,
                                            const Embedder& embedder) {
  if (bundles.size() < 2)
    throw Error(ErrorCode::TooFewBundles, "need at least two bundles to compare");
  RuleSimilarityReport report;
  std::vector<std::string> concatenated;
  for (const auto& b : bundles) concatenated.push_back(concat_rules(b.rules_snapshot, b.label_scale));
  for (std::size_t i = 0; i + 1 < bundles.size(); ++i) {
    report.pairs.push_back({i + 1, i + 2,
                            normalized_edit_similarity(concatenated[i], concatenated[i + 1]),
                            semantic_similarity(concatenated[i], concatenated[i + 1], embedder)});
  }
  return report;
}

std::string rule_similarity_csv(const RuleSimilarityReport& report) {
  std::string out = csv::format_row({"pair", "edit_sim", "semantic_sim"});
  for (const auto& p : report.pairs)
    out += csv::format_row({std::to_string(p.from) + "->" + std::to_string(p.to),
                            format_metric(p.edit_similarity), format_metric(p.semantic_similarity)});
  return out;
}

}  // namespace darklabel
