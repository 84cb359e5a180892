#include <gtest/gtest.h>

#include <random>

#include "darklabel/engine.hpp"
#include "darklabel/error.hpp"

using namespace darklabel;

namespace {

const LabelScale& scale() {
  static const LabelScale s = sentiment_scale();
  return s;
}

ErrorCode parse_error(std::string_view text) {
  try {
    parse_single_response(text, scale());
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::Io;
}

}  // namespace

TEST(ParseSingle, CanonicalForm) {
  const auto a = parse_single_response("ANSWER: Label: [Positive]\nEXPLANATION: Upbeat tone.\n", scale());
  EXPECT_EQ(a.label, "Positive");
  EXPECT_EQ(a.explanation, "Upbeat tone.");
}

TEST(ParseSingle, Tolerances) {
  EXPECT_EQ(parse_single_response("answer: label: extremely negative", scale()).label, "Extremely Negative");
  EXPECT_EQ(parse_single_response("  ANSWER:   Label:   Neutral  \n", scale()).label, "Neutral");
  EXPECT_EQ(parse_single_response("Sure!\nANSWER: Label: [ Negative ]\nexplanation - x", scale()).label,
            "Negative");
  EXPECT_EQ(parse_single_response("Label: Positive\nEXPLANATION: y", scale()).label, "Positive");
  EXPECT_EQ(parse_single_response("ANSWER: Neutral\n", scale()).label, "Neutral");
}

TEST(ParseSingle, Failures) {
  EXPECT_EQ(parse_error("I think it is positive."), ErrorCode::NoAnswerSection);
  EXPECT_EQ(parse_error("ANSWER: Label: [Happy]"), ErrorCode::UnknownLabel);
  EXPECT_EQ(parse_error("ANSWER: Label: []"), ErrorCode::UnknownLabel);
}

TEST(ParseMulti, TaggedFragmentsGoToTheirIndex) {
  const std::string text =
      "data-instance-2\nANSWER: Label: [Negative]\nEXPLANATION: b\n======\n"
      "data-instance-1\nANSWER: Label: [Positive]\nEXPLANATION: a\n";
  const auto p = parse_multi_response(text, 2, scale());
  ASSERT_EQ(p.results.size(), 2u);
  EXPECT_EQ(p.results[0].answer->label, "Positive");
  EXPECT_EQ(p.results[1].answer->label, "Negative");
  EXPECT_EQ(p.discarded_fragments, 0u);
}

TEST(ParseMulti, MissingAndExtraFragments) {
  const std::string text =
      "ANSWER: Label: [Neutral]\n=====\ndata-instance-7\nANSWER: Label: [Positive]\n";
  const auto p = parse_multi_response(text, 2, scale());
  EXPECT_EQ(p.results[0].answer->label, "Neutral");
  ASSERT_TRUE(p.results[1].error);
  EXPECT_EQ(p.results[1].error->code(), ErrorCode::MissingFragment);
  EXPECT_EQ(p.discarded_fragments, 1u);
}

TEST(ParseMulti, BadFragmentOnlyAffectsItsInstance) {
  const std::string text = "ANSWER: Label: [Meh]\n======\nANSWER: Label: [Positive]\n";
  const auto p = parse_multi_response(text, 2, scale());
  EXPECT_EQ(p.results[0].error->code(), ErrorCode::UnknownLabel);
  EXPECT_EQ(p.results[1].answer->label, "Positive");
}

TEST(ParseProperty, RenderedResponsesRoundTrip) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> explanations = {"", "short", "Mentions a refund.", "multi word reason here",
                                                 "Label: inside text"};
  const std::vector<std::string> label_styles = {"[%s]", "%s", "[ %s ]"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 5;
    std::vector<std::string> labels;
    std::vector<std::string> expl;
    std::vector<std::string> fragments;
    for (std::size_t k = 0; k < n; ++k) {
      labels.push_back(scale().labels()[rng() % scale().size()]);
      expl.push_back(explanations[rng() % explanations.size()]);
      std::string label = labels.back();
      if (rng() % 2) {
        for (auto& ch : label) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      }
      const auto& style = label_styles[rng() % label_styles.size()];
      const auto at = style.find("%s");
      std::string frag;
      if (n > 1) frag += "data-instance-" + std::to_string(k + 1) + "\n";
      frag += (rng() % 2 ? "ANSWER: Label: " : "answer: label: ") + style.substr(0, at) + label +
              style.substr(at + 2) + "\n";
      frag += "EXPLANATION: " + expl.back() + "\n";
      fragments.push_back(frag);
    }
    // Tagged fragments may arrive in any order.
    std::shuffle(fragments.begin(), fragments.end(), rng);
    std::string text;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) text += std::string(rng() % 2 ? "======" : "===") + "\n";
      text += fragments[k];
    }
    if (n == 1) {
      const auto a = parse_single_response(text, scale());
      ASSERT_EQ(a.label, labels[0]) << text;
      ASSERT_EQ(a.explanation, expl[0]) << text;
      continue;
    }
    const auto p = parse_multi_response(text, n, scale());
    ASSERT_EQ(p.results.size(), n);
    for (std::size_t k = 0; k < n; ++k) {
      ASSERT_TRUE(p.results[k].answer) << text;
      ASSERT_EQ(p.results[k].answer->label, labels[k]) << text;
      ASSERT_EQ(p.results[k].answer->explanation, expl[k]) << text;
    }
  }
}
