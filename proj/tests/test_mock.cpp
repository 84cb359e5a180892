#include <gtest/gtest.h>

#include "darklabel/engine.hpp"
#include "darklabel/error.hpp"
#include "darklabel/mock_provider.hpp"
#include "darklabel/prompt.hpp"
#include "support.hpp"

using namespace darklabel;

namespace {

const std::vector<std::pair<std::string, std::string>> kNoRules;
const std::vector<std::pair<std::string, std::string>> kNoShots;

std::string decide(const std::string& text,
                   const std::vector<std::pair<std::string, std::string>>& rules = kNoRules,
                   const std::vector<std::pair<std::string, std::string>>& shots = kNoShots) {
  return mock_decide(MockLexicon::builtin(), dltest::labels(), rules, shots, text).label;
}

}  // namespace

TEST(MockDecide, LexiconScoreThresholds) {
  EXPECT_EQ(decide("awful terrible day"), "Extremely Negative");
  EXPECT_EQ(decide("awful terrible great day"), "Negative");
  EXPECT_EQ(decide("a plain day"), "Neutral");
  EXPECT_EQ(decide("great sad happy"), "Positive");
  EXPECT_EQ(decide("great, happy and grateful"), "Extremely Positive");
}

TEST(MockDecide, RuleOverrideBeatsShotsAndLexicon) {
  const std::vector<std::pair<std::string, std::string>> rules = {
      {"Positive", "Praise: contains(\"REFUND\")"}, {"Negative", "contains(\"refund\")"}};
  const std::vector<std::pair<std::string, std::string>> shots = {{"refund please", "Neutral"}};
  // Negative precedes Positive on the scale, so its rule is tried first.
  EXPECT_EQ(decide("Great, a Refund arrived", rules, shots), "Negative");
}

TEST(MockDecide, ShotCueNeedsSharedCueWord) {
  const std::vector<std::pair<std::string, std::string>> shots = {
      {"The bus was cancelled", "Negative"}, {"Flight delayed, lovely", "Positive"}};
  EXPECT_EQ(decide("my order was delayed", kNoRules, shots), "Positive");
  EXPECT_EQ(decide("match cancelled, great", kNoRules, shots), "Negative");
  // "bus" is shared but is not a cue word.
  EXPECT_EQ(decide("the bus is here", kNoRules, shots), "Neutral");
}

TEST(MockDecide, OtherScaleSizesSpreadOrdinals) {
  const std::vector<std::string> two = {"Bad", "Good"};
  EXPECT_EQ(mock_decide(MockLexicon::builtin(), two, {}, {}, "awful terrible").label, "Bad");
  EXPECT_EQ(mock_decide(MockLexicon::builtin(), two, {}, {}, "great happy").label, "Good");
}

TEST(MockComplete, AnswersInstructionRequests) {
  auto wb = dltest::fixture_workbook();
  const auto c = mock_complete(MockLexicon::builtin(),
                               ChatRequest::user(kMockModel, build_instruction_request(wb.context)));
  EXPECT_EQ(c.text, MockLexicon::builtin().instruction);
  EXPECT_TRUE(c.usage_estimated);
}

TEST(MockComplete, AnnotatesSingleAndMultiPrompts) {
  const auto bundle = dltest::base_bundle();
  const std::vector<PromptInstance> one = {{1, "g", "awful terrible"}};
  auto c = mock_complete(MockLexicon::builtin(),
                         ChatRequest::user(kMockModel, compose_annotation_prompt(bundle, one)));
  EXPECT_EQ(parse_single_response(c.text, bundle.label_scale).label, "Extremely Negative");

  const std::vector<PromptInstance> three = {{1, "g", "great"}, {2, "g", "plain"}, {3, "g", "sad"}};
  c = mock_complete(MockLexicon::builtin(),
                    ChatRequest::user(kMockModel, compose_annotation_prompt(bundle, three)));
  const auto parsed = parse_multi_response(c.text, 3, bundle.label_scale);
  ASSERT_EQ(parsed.results.size(), 3u);
  EXPECT_EQ(parsed.results[0].answer->label, "Positive");
  EXPECT_EQ(parsed.results[1].answer->label, "Neutral");
  EXPECT_EQ(parsed.results[2].answer->label, "Negative");
}

TEST(MockComplete, UsageIsCeilOfQuarterCharacters) {
  const auto bundle = dltest::base_bundle();
  const std::vector<PromptInstance> one = {{1, "g", "hello"}};
  const auto prompt = compose_annotation_prompt(bundle, one);
  const auto c = mock_complete(MockLexicon::builtin(), ChatRequest::user(kMockModel, prompt));
  EXPECT_EQ(c.usage.prompt_tokens, static_cast<std::int64_t>((prompt.size() + 3) / 4));
  EXPECT_EQ(c.usage.completion_tokens, static_cast<std::int64_t>((c.text.size() + 3) / 4));
}

TEST(MockComplete, IsAPureFunction) {
  const auto bundle = dltest::base_bundle();
  const std::vector<PromptInstance> one = {{1, "g", "great day"}};
  const auto req = ChatRequest::user(kMockModel, compose_annotation_prompt(bundle, one));
  const auto a = mock_complete(MockLexicon::builtin(), req);
  const auto b = mock_complete(MockLexicon::builtin(), req);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.usage, b.usage);
}

TEST(MockComplete, RejectsUnknownPrompts) {
  try {
    mock_complete(MockLexicon::builtin(), ChatRequest::user(kMockModel, "What is the weather?"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnrecognizedPrompt);
  }
}

TEST(MockLexicon, FixtureFileEqualsBuiltin) {
  EXPECT_EQ(MockLexicon::load(dltest::fixture_path("mock_lexicon.json")), MockLexicon::builtin());
  EXPECT_EQ(MockLexicon::builtin().positive.size(), 40u);
  EXPECT_EQ(MockLexicon::builtin().negative.size(), 40u);
  EXPECT_EQ(MockLexicon::builtin().cues.size(), 10u);
}

TEST(MockLexicon, InvalidJsonIsAConfigError) {
  try {
    MockLexicon::from_json_text("{\"positive\": 3}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(Costs, DefaultPricesAndLookup) {
  const auto table = CostTable::defaults();
  EXPECT_DOUBLE_EQ(compute_cost({1'000'000, 0}, "gpt-4o-2024-05-13", table), 5.0);
  EXPECT_DOUBLE_EQ(compute_cost({0, 1'000'000}, kMockModel, table), 15.0);
  EXPECT_DOUBLE_EQ(compute_cost({2000, 1000}, kMockModel, table), 0.025);
  try {
    compute_cost({1, 1}, "other", table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownModel);
  }
}

TEST(Costs, TableFromJson) {
  const auto t = CostTable::from_json_text(
      R"({"currency": "EUR", "models": {"m": {"input_per_1m": 1.5, "output_per_1m": 2}}})");
  EXPECT_EQ(t.currency, "EUR");
  EXPECT_DOUBLE_EQ(compute_cost({1'000'000, 1'000'000}, "m", t), 3.5);
}
