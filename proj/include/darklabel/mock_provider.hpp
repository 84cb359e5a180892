#pragma once

#include <set>
#include <string>
#include <vector>

#include "darklabel/llm.hpp"
#include "darklabel/types.hpp"

namespace darklabel {

/// Word lists driving the offline mock model.
///
/// Labels are decided per instance in three tiers, first hit wins:
///  1. rule override: a rule containing `contains("w")` forces its label when
///     the instance contains w (case-insensitive); labels are tried in scale
///     order, rules in prompt order;
///  2. shot cue: when the instance shares a cue word with a shot in the
///     prompt, the first such shot's label is used;
///  3. lexicon score: (#positive - #negative) words, mapped to ordinals
///     1..5 by the thresholds <= -2, -1, 0, +1, >= +2.
struct MockLexicon {
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string> cues;
  std::string instruction;

  static const MockLexicon& builtin();
  /// JSON: {"positive": [...], "negative": [...], "cues": [...], "instruction": "..."}
  static MockLexicon from_json_text(const std::string& text);
  static MockLexicon load(const std::string& path);

  bool operator==(const MockLexicon&) const = default;
};

inline constexpr const char* kMockModel = "mock-lexicon-v1";

/// Pure function of (lexicon, request). Token usage is ceil(chars / 4) of the
/// request contents and of the output; it is marked as estimated.
/// Throws UnrecognizedPrompt.
Completion mock_complete(const MockLexicon& lexicon, const ChatRequest& request);

struct MockDecision {
  std::string label;
  std::string explanation;
};

/// Tiered label decision for one instance, given the labels, rules (label,
/// text) and shots (text, label) as they appear in a prompt.
MockDecision mock_decide(const MockLexicon& lexicon, const std::vector<std::string>& labels,
                         const std::vector<std::pair<std::string, std::string>>& rules,
                         const std::vector<std::pair<std::string, std::string>>& shots,
                         const std::string& instance);

class MockProvider : public Provider {
 public:
  explicit MockProvider(MockLexicon lexicon = MockLexicon::builtin())
      : lexicon_(std::move(lexicon)) {}

  Completion complete(const ChatRequest& request) override {
    return mock_complete(lexicon_, request);
  }
  std::string model() const override { return kMockModel; }
  const MockLexicon& lexicon() const noexcept { return lexicon_; }

 private:
  MockLexicon lexicon_;
};

}  // namespace darklabel
