#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "darklabel/types.hpp"

namespace darklabel {

using Prediction = std::optional<std::string>;

/// Exact-match fraction; absent predictions count as wrong.
/// Throws LengthMismatch or Empty.
double accuracy(std::span<const Prediction> pred, std::span<const std::string> gold);

struct MseResult {
  double mse = 0.0;
  std::size_t excluded = 0;
};

/// Mean squared ordinal distance over parsed predictions. Absent predictions
/// are excluded and counted. Throws LengthMismatch, Empty or AllExcluded.
MseResult mse(std::span<const Prediction> pred, std::span<const std::string> gold,
              const LabelScale& scale);

/// Unweighted Cohen's kappa; 1.0 when chance agreement is 1.
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

/// Pearson correlation of average-tie ranks. Throws DegenerateConstantVector.
double spearman(std::span<const double> a, std::span<const double> b);

/// Kendall tau-b with tie correction. Throws DegenerateConstantVector.
double kendall_tau_b(std::span<const double> a, std::span<const double> b);

/// Levenshtein distance over Unicode scalar values.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - levenshtein / max length (in scalar values); 1.0 for two empty strings.
double normalized_edit_similarity(std::string_view a, std::string_view b);

/// Sparse embedding keyed by feature name.
using Embedding = std::map<std::string, double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
};

/// L2-normalised term frequencies of character trigrams of the lower-cased
/// text. Texts shorter than three characters yield one feature: the text.
class TrigramEmbedder : public Embedder {
 public:
  Embedding embed(std::string_view text) const override;
};

/// 0.0 when either vector is zero.
double cosine(const Embedding& a, const Embedding& b);

/// Cosine of the two embeddings; identical strings give 1.0.
double semantic_similarity(std::string_view a, std::string_view b, const Embedder& embedder);

}  // namespace darklabel
