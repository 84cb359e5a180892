#include "darklabel/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "darklabel/error.hpp"
#include "darklabel/random.hpp"

namespace darklabel {

std::vector<ValidatedExample> collect_validated(const Workbook& wb) {
  struct Entry {
    std::string label;
    bool human;
  };
  std::vector<std::string> order;
  std::map<std::string, Entry> by_text;
  auto offer = [&](const std::string& text, const std::string& label, bool human) {
    auto it = by_text.find(text);
    if (it == by_text.end()) {
      order.push_back(text);
      by_text.emplace(text, Entry{label, human});
    } else if (human && !it->second.human) {
      it->second = {label, true};
    }
  };
  for (const auto& s : wb.shots) offer(s.text, s.gold_label, true);
  for (const auto& t : wb.tasks) {
    for (const auto& r : t.results) {
      if (r.human_label)
        offer(r.text, *r.human_label, true);
      else if (r.agree && r.llm_label)
        offer(r.text, *r.llm_label, false);
    }
  }
  std::vector<ValidatedExample> out;
  for (const auto& text : order) out.push_back({text, by_text.at(text).label});
  return out;
}

namespace {

double dev_accuracy(const PromptBundle& bundle, const std::vector<ValidatedExample>& dev,
                    Provider& provider, const AnnotationOptions& options) {
  std::vector<PromptInstance> instances;
  std::vector<std::string> gold;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i + 1);
    instances.push_back({id, "dev-" + std::to_string(id), dev[i].text});
    gold.push_back(dev[i].human_label);
  }
  const auto batch = annotate_instances(bundle, instances, provider, options);
  std::vector<Prediction> pred;
  for (const auto& r : batch.results) pred.push_back(r.llm_label);
  return accuracy(pred, gold);
}

PromptBundle with_demos(const PromptBundle& base, const std::vector<Shot>& demos) {
  PromptBundle b = base;
  for (const auto& d : demos) {
    const bool dup = std::any_of(b.shots_snapshot.begin(), b.shots_snapshot.end(), [&](const Shot& s) {
      return s.text == d.text && s.gold_label == d.gold_label;
    });
    if (!dup) b.shots_snapshot.push_back(d);
  }
  return b;
}

}  // namespace

OptimizationResult bootstrap_fewshot(const PromptBundle& bundle,
                                     const std::vector<ValidatedExample>& examples,
                                     Provider& provider, const OptimizationConfig& config,
                                     const AnnotationOptions& options) {
  if (examples.size() < 2)
    throw Error(ErrorCode::TooFewExamples, "need at least two validated examples",
                std::to_string(examples.size()));
  if (!(config.dev_fraction > 0.0 && config.dev_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "dev fraction must be within (0, 1)");
  if (config.num_candidate_sets < 1)
    throw Error(ErrorCode::InvalidConfig, "need at least one candidate set");
  for (const auto& e : examples)
    if (!bundle.label_scale.contains(e.human_label))
      throw Error(ErrorCode::UnknownLabel, "example label not in scale", e.human_label);

  SeededRng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const auto n = examples.size();
  auto n_dev = static_cast<std::size_t>(std::llround(config.dev_fraction * static_cast<double>(n)));
  n_dev = std::clamp<std::size_t>(n_dev, 1, n - 1);
  if (n_dev == 0) throw Error(ErrorCode::NoDevItems, "dev split is empty");

  OptimizationResult out;
  for (std::size_t i = 0; i < n; ++i)
    (i < n_dev ? out.dev : out.train).push_back(examples[order[i]]);

  // Teacher pass over the train split.
  {
    std::vector<PromptInstance> instances;
    for (std::size_t i = 0; i < out.train.size(); ++i) {
      const auto id = static_cast<std::int64_t>(i + 1);
      instances.push_back({id, "train-" + std::to_string(id), out.train[i].text});
    }
    const auto batch = annotate_instances(bundle, instances, provider, options);
    for (std::size_t i = 0; i < out.train.size(); ++i)
      if (batch.results[i].llm_label && *batch.results[i].llm_label == out.train[i].human_label)
        out.candidates.push_back(out.train[i]);
  }

  std::vector<std::vector<std::size_t>> sets{{}};
  const auto k = std::min(config.max_demos, out.candidates.size());
  if (k > 0) {
    for (std::size_t s = 0; s < config.num_candidate_sets; ++s) {
      auto pick = rng.choose(out.candidates.size(), k);
      std::sort(pick.begin(), pick.end());
      sets.push_back(std::move(pick));
    }
  }
  out.candidate_sets = sets.size();

  std::map<std::vector<std::size_t>, double> memo;
  std::size_t best = 0;
  double best_acc = -1.0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    auto it = memo.find(sets[s]);
    double acc;
    if (it != memo.end()) {
      acc = it->second;
    } else {
      std::vector<Shot> demos;
      for (auto i : sets[s]) demos.push_back({out.candidates[i].text, out.candidates[i].human_label, {}});
      acc = dev_accuracy(with_demos(bundle, demos), out.dev, provider, options);
      memo.emplace(sets[s], acc);
    }
    if (s == 0) out.baseline_dev_acc = acc;
    const bool better = acc > best_acc || (acc == best_acc && sets[s].size() < sets[best].size());
    if (better) {
      best = s;
      best_acc = acc;
    }
  }

  for (auto i : sets[best])
    out.demos.push_back({out.candidates[i].text, out.candidates[i].human_label, {}});
  out.optimized = with_demos(bundle, out.demos);
  out.dev_acc = best_acc;
  return out;
}

OptimizationReport optimize_report(const PromptBundle& before, const PromptBundle& after,
                                   const GoldSet& gold, Provider& provider,
                                   const AnnotationOptions& options) {
  const auto eval =
      evaluate_session({{"Before", before}, {"After", after}}, gold, provider, options);
  return {eval.rows[0].acc, eval.rows[1].acc, eval.rows[0].mse, eval.rows[1].mse};
}

}  // namespace darklabel
