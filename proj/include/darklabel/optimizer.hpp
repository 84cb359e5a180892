#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darklabel/engine.hpp"
#include "darklabel/evaluation.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

struct ValidatedExample {
  std::string text;
  std::string human_label;

  bool operator==(const ValidatedExample&) const = default;
};

/// Shots plus task results a human confirmed (human_label set, or agree with
/// an LLM label), deduplicated by text. A human label beats an agreed LLM
/// label for the same text; otherwise the first occurrence wins.
std::vector<ValidatedExample> collect_validated(const Workbook& wb);

struct OptimizationConfig {
  std::size_t max_demos = 4;
  std::size_t num_candidate_sets = 8;
  double dev_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct OptimizationResult {
  PromptBundle optimized;
  double dev_acc = 0.0;
  double baseline_dev_acc = 0.0;
  std::vector<Shot> demos;                      // shots added to the bundle
  std::vector<ValidatedExample> train;
  std::vector<ValidatedExample> dev;
  std::vector<ValidatedExample> candidates;     // teacher-correct train examples
  std::size_t candidate_sets = 0;               // including the empty baseline set
};

/// Bootstrap few-shot search. Shuffles the examples with `seed` and splits off
/// a dev set; labels the train split with the current bundle and keeps the
/// examples it already gets right as demo candidates; evaluates the empty set
/// and `num_candidate_sets` random subsets of size min(max_demos, |candidates|)
/// appended to the bundle's shots; returns the best by dev accuracy (ties: fewer
/// demos, then earlier set). Throws TooFewExamples, NoDevItems, InvalidConfig.
OptimizationResult bootstrap_fewshot(const PromptBundle& bundle,
                                     const std::vector<ValidatedExample>& examples,
                                     Provider& provider, const OptimizationConfig& config,
                                     const AnnotationOptions& options);

struct OptimizationReport {
  double acc_before = 0.0;
  double acc_after = 0.0;
  std::optional<double> mse_before;
  std::optional<double> mse_after;
};

/// Before/after comparison of two bundles on a gold set.
OptimizationReport optimize_report(const PromptBundle& before, const PromptBundle& after,
                                   const GoldSet& gold, Provider& provider,
                                   const AnnotationOptions& options);

}  // namespace darklabel
