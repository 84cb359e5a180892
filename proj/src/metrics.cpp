#include "darklabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "darklabel/error.hpp"
#include "darklabel/text.hpp"

namespace darklabel {

namespace {

template <typename A, typename B>
void check_lengths(const A& a, const B& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, "inputs differ in length",
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.empty()) throw Error(ErrorCode::Empty, "inputs are empty");
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double accuracy(std::span<const Prediction> pred, std::span<const std::string> gold) {
  check_lengths(pred, gold);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] && *pred[i] == gold[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

MseResult mse(std::span<const Prediction> pred, std::span<const std::string> gold,
              const LabelScale& scale) {
  check_lengths(pred, gold);
  MseResult out;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred[i]) {
      ++out.excluded;
      continue;
    }
    const double d = scale.ordinal(*pred[i]) - scale.ordinal(gold[i]);
    sum += d * d;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::AllExcluded, "no prediction was parsed");
  out.mse = sum / static_cast<double>(n);
  return out;
}

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  check_lengths(a, b);
  const double n = static_cast<double>(a.size());
  std::map<std::string_view, double> ma, mb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1;
    mb[b[i]] += 1;
    if (a[i] == b[i]) agree += 1;
  }
  const double p_o = agree / n;
  double p_e = 0;
  for (const auto& [cat, count] : ma) {
    auto it = mb.find(cat);
    if (it != mb.end()) p_e += (count / n) * (it->second / n);
  }
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  if (a.size() < 2 || constant(a) || constant(b))
    throw Error(ErrorCode::DegenerateConstantVector, "correlation undefined for constant input");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean_a) * (rb[i] - mean_b);
    saa += (ra[i] - mean_a) * (ra[i] - mean_a);
    sbb += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  return sab / std::sqrt(saa * sbb);
}

double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  if (a.size() < 2 || constant(a) || constant(b))
    throw Error(ErrorCode::DegenerateConstantVector, "correlation undefined for constant input");
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ties_a += 1;
      } else if (db == 0) {
        ties_b += 1;
      } else if ((da > 0) == (db > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  // Pairs tied in both count toward neither denominator factor.
  const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return (concordant - discordant) / denom;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_similarity(std::string_view a, std::string_view b) {
  const auto ua = text::utf8_decode(a);
  const auto ub = text::utf8_decode(b);
  const auto longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

Embedding TrigramEmbedder::embed(std::string_view text) const {
  const auto chars = text::utf8_decode(text::to_lower(text));
  Embedding e;
  if (chars.empty()) return e;
  if (chars.size() < 3) {
    e[text::utf8_encode(chars)] = 1.0;
    return e;
  }
  for (std::size_t i = 0; i + 3 <= chars.size(); ++i)
    e[text::utf8_encode(std::u32string_view(chars).substr(i, 3))] += 1.0;
  double norm = 0;
  for (const auto& [k, v] : e) norm += v * v;
  norm = std::sqrt(norm);
  for (auto& [k, v] : e) v /= norm;
  return e;
}

double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : a) {
    na += v * v;
    if (auto it = b.find(k); it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double semantic_similarity(std::string_view a, std::string_view b, const Embedder& embedder) {
  if (a == b && !a.empty()) return 1.0;
  return cosine(embedder.embed(a), embedder.embed(b));
}

}  // namespace darklabel
