#include <gtest/gtest.h>

#include <cmath>

#include "darklabel/error.hpp"
#include "darklabel/metrics.hpp"

using namespace darklabel;

namespace {

// Reference formulations, written from the textbook definitions rather than
// the library's.

double kappa_oracle(const std::vector<int>& a, const std::vector<int>& b, int k) {
  std::vector<std::vector<double>> m(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
  for (std::size_t i = 0; i < a.size(); ++i) m[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1;
  const double n = static_cast<double>(a.size());
  double po = 0, pe = 0;
  for (int i = 0; i < k; ++i) {
    po += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] / n;
    double row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      col += m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    pe += row * col / (n * n);
  }
  return pe == 1.0 ? 1.0 : (po - pe) / (1 - pe);
}

std::vector<double> rank_oracle(const std::vector<double>& v) {
  std::vector<double> r;
  for (double x : v) {
    double less = 0, equal = 0;
    for (double y : v) {
      if (y < x) less += 1;
      if (y == x) equal += 1;
    }
    r.push_back(less + (equal + 1) / 2);
  }
  return r;
}

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

double tau_b_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double n0 = n * (n - 1) / 2;
  auto tie_pairs = [](const std::vector<double>& v) {
    double t = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (v[i] == v[j]) t += 1;
    return t;
  };
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double x = a[i] - a[j], y = b[i] - b[j];
      s += ((x > 0) - (x < 0)) * ((y > 0) - (y < 0));
    }
  return s / std::sqrt((n0 - tie_pairs(a)) * (n0 - tie_pairs(b)));
}

bool is_constant(const std::vector<double>& v) {
  for (double x : v)
    if (x != v[0]) return false;
  return true;
}

// Every vector of length `len` over {0..k-1}.
std::vector<std::vector<int>> all_vectors(int len, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(static_cast<std::size_t>(len), 0);
  for (;;) {
    out.push_back(v);
    int i = 0;
    while (i < len && ++v[static_cast<std::size_t>(i)] == k) v[static_cast<std::size_t>(i++)] = 0;
    if (i == len) return out;
  }
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(Metrics, AccuracyAndMseHandExamples) {
  const auto scale = sentiment_scale();
  const std::vector<Prediction> pred = {"Positive", "Negative", std::nullopt, "Extremely Negative"};
  const std::vector<std::string> gold = {"Positive", "Neutral", "Neutral", "Extremely Positive"};
  EXPECT_DOUBLE_EQ(accuracy(pred, gold), 0.25);
  const auto m = mse(pred, gold, scale);
  // (0 + 1 + 16) / 3 with the unparsed prediction excluded.
  EXPECT_NEAR(m.mse, 17.0 / 3.0, 1e-12);
  EXPECT_EQ(m.excluded, 1u);
}

TEST(Metrics, ErrorCases) {
  const auto scale = sentiment_scale();
  const std::vector<Prediction> none = {std::nullopt};
  const std::vector<std::string> one = {"Neutral"};
  const std::vector<std::string> two = {"Neutral", "Neutral"};
  EXPECT_EQ(code_of([&] { accuracy(none, two); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { accuracy({}, {}); }), ErrorCode::Empty);
  EXPECT_EQ(code_of([&] { mse(none, one, scale); }), ErrorCode::AllExcluded);
  const std::vector<double> c = {1, 1, 1};
  const std::vector<double> v = {1, 2, 3};
  EXPECT_EQ(code_of([&] { spearman(c, v); }), ErrorCode::DegenerateConstantVector);
  EXPECT_EQ(code_of([&] { kendall_tau_b(v, c); }), ErrorCode::DegenerateConstantVector);
}

TEST(Metrics, KappaMatchesOracleExhaustively) {
  const std::vector<std::string> names = {"a", "b", "c"};
  for (int len = 1; len <= 5; ++len) {
    const auto vectors = all_vectors(len, 3);
    for (const auto& a : vectors)
      for (const auto& b : vectors) {
        std::vector<std::string> sa, sb;
        for (int x : a) sa.push_back(names[static_cast<std::size_t>(x)]);
        for (int x : b) sb.push_back(names[static_cast<std::size_t>(x)]);
        ASSERT_NEAR(cohen_kappa(sa, sb), kappa_oracle(a, b, 3), 1e-9);
      }
  }
}

TEST(Metrics, RankCorrelationsMatchOraclesExhaustively) {
  for (int len = 2; len <= 5; ++len) {
    const auto vectors = all_vectors(len, 3);
    for (const auto& ia : vectors)
      for (const auto& ib : vectors) {
        const std::vector<double> a(ia.begin(), ia.end()), b(ib.begin(), ib.end());
        if (is_constant(a) || is_constant(b)) continue;
        ASSERT_NEAR(spearman(a, b), pearson_oracle(rank_oracle(a), rank_oracle(b)), 1e-9);
        ASSERT_NEAR(kendall_tau_b(a, b), tau_b_oracle(a, b), 1e-9);
      }
  }
}

TEST(Metrics, KnownCorrelations) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> rev = {5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, a), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, rev), -1.0, 1e-12);
  EXPECT_NEAR(kendall_tau_b(a, rev), -1.0, 1e-12);
  const std::vector<std::string> x = {"p", "p", "n", "n"};
  EXPECT_DOUBLE_EQ(cohen_kappa(x, x), 1.0);
  const std::vector<std::string> same = {"p", "p"};
  EXPECT_DOUBLE_EQ(cohen_kappa(same, same), 1.0);
}

TEST(Metrics, EditSimilarity) {
  EXPECT_NEAR(normalized_edit_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(normalized_edit_similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(normalized_edit_similarity("abc", ""), 0.0);
  // Counted in scalar values, not bytes.
  EXPECT_NEAR(normalized_edit_similarity("café", "cafe"), 0.75, 1e-12);
  EXPECT_EQ(levenshtein(U"flaw", U"lawn"), 2u);
}

TEST(Metrics, SemanticSimilarity) {
  TrigramEmbedder embedder;
  EXPECT_DOUBLE_EQ(semantic_similarity("same text", "same text", embedder), 1.0);
  const double close = semantic_similarity("mentions a refund problem", "mentions a refund issue", embedder);
  const double far = semantic_similarity("mentions a refund problem", "xyz qqq", embedder);
  EXPECT_GT(close, far);
  EXPECT_GE(far, 0.0);
  EXPECT_LE(close, 1.0);
  EXPECT_DOUBLE_EQ(cosine({}, {{"a", 1.0}}), 0.0);
}
