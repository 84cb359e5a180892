#include "darklabel/mock_provider.hpp"

#include <cmath>

#include "darklabel/csv.hpp"
#include "darklabel/persistence.hpp"
#include "darklabel/prompt.hpp"
#include "darklabel/text.hpp"

namespace darklabel {

namespace {

constexpr std::string_view kLabelPrefix = "Label '";
constexpr std::string_view kLabelSuffix =
    "': Assign this label if the tweet meets any of the following criteria:";
constexpr std::string_view kShotPrefix = "Example:```";
constexpr std::string_view kShotMiddle = "''' => Label:```";
constexpr std::string_view kShotSuffix = "'''";
constexpr std::string_view kSingleIntro = "The following is the data instance need to be annotated:";
constexpr std::string_view kMultiIntro =
    "The following are data instances from a group that need to be annotated:";

struct ParsedPrompt {
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> rules;  // (label, text)
  std::vector<std::pair<std::string, std::string>> shots;  // (text, label)
  std::vector<std::string> instances;
  bool multi = false;
};

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

std::optional<ParsedPrompt> parse_annotation_prompt(const std::string& prompt) {
  ParsedPrompt out;
  const auto single_at = prompt.find(std::string(kSingleIntro) + "\n");
  const auto multi_at = prompt.find(std::string(kMultiIntro) + "\n");
  std::size_t body_end;
  if (single_at != std::string::npos) {
    body_end = single_at;
    auto rest = std::string_view(prompt).substr(single_at + kSingleIntro.size() + 1);
    if (!starts_with(rest, "data-instance: ")) return std::nullopt;
    rest.remove_prefix(std::string_view("data-instance: ").size());
    if (ends_with(rest, "\n")) rest.remove_suffix(1);
    out.instances.emplace_back(rest);
  } else if (multi_at != std::string::npos) {
    body_end = multi_at;
    out.multi = true;
    std::string_view rest = std::string_view(prompt).substr(multi_at + kMultiIntro.size() + 1);
    for (int k = 1;; ++k) {
      const std::string tag = "data-instance-" + std::to_string(k) + ": ";
      if (!starts_with(rest, tag)) break;
      rest.remove_prefix(tag.size());
      const std::string next = "\ndata-instance-" + std::to_string(k + 1) + ": ";
      auto cut = rest.find(next);
      if (cut == std::string_view::npos) {
        auto text = rest;
        if (ends_with(text, "\n")) text.remove_suffix(1);
        out.instances.emplace_back(text);
        break;
      }
      out.instances.emplace_back(rest.substr(0, cut));
      rest.remove_prefix(cut + 1);
    }
    if (out.instances.empty()) return std::nullopt;
  } else {
    return std::nullopt;
  }

  std::string current_label;
  for (const auto& line : text::split_lines(std::string_view(prompt).substr(0, body_end))) {
    if (starts_with(line, kLabelPrefix) && ends_with(line, kLabelSuffix)) {
      current_label = line.substr(kLabelPrefix.size(),
                                  line.size() - kLabelPrefix.size() - kLabelSuffix.size());
      out.labels.push_back(current_label);
      continue;
    }
    if (line.empty()) {
      current_label.clear();
      continue;
    }
    if (starts_with(line, kShotPrefix) && ends_with(line, kShotSuffix)) {
      auto mid = line.find(kShotMiddle, kShotPrefix.size());
      if (mid != std::string::npos) {
        auto shot_text = line.substr(kShotPrefix.size(), mid - kShotPrefix.size());
        auto label_start = mid + kShotMiddle.size();
        auto label = line.substr(label_start, line.size() - label_start - kShotSuffix.size());
        out.shots.emplace_back(shot_text, label);
        continue;
      }
    }
    if (!current_label.empty()) out.rules.emplace_back(current_label, line);
  }
  if (out.labels.size() < 2) return std::nullopt;
  return out;
}

// Every w in `contains("w")` occurring in a rule.
std::vector<std::string> contains_directives(std::string_view rule) {
  std::vector<std::string> out;
  constexpr std::string_view kOpen = "contains(\"";
  std::size_t at = 0;
  while ((at = rule.find(kOpen, at)) != std::string_view::npos) {
    const auto start = at + kOpen.size();
    const auto close = rule.find("\")", start);
    if (close == std::string_view::npos) break;
    if (close > start) out.emplace_back(rule.substr(start, close - start));
    at = close + 2;
  }
  return out;
}

int score_to_ordinal(int score) {
  if (score <= -2) return 1;
  if (score >= 2) return 5;
  return score + 3;
}

std::int64_t estimate_tokens(std::size_t chars) {
  return static_cast<std::int64_t>((chars + 3) / 4);
}

}  // namespace

const MockLexicon& MockLexicon::builtin() {
  static const MockLexicon kLexicon{
      {"amazing",  "awesome", "beautiful", "best",    "brilliant", "calm",     "cheers",
       "enjoy",    "enjoyed", "excellent", "fantastic", "fun",     "glad",     "good",
       "grateful", "great",   "happy",     "healthy", "helpful",   "hope",     "hopeful",
       "kind",     "love",    "lovely",    "nice",    "perfect",   "positive", "proud",
       "recover",  "recovered", "relief",  "relieved", "safe",     "smile",    "success",
       "support",  "thank",   "thanks",    "win",     "wonderful"},
      {"afraid",   "angry",   "awful",     "bad",     "broke",     "chaos",    "crash",
       "crisis",   "dead",    "death",     "died",    "disaster",  "empty",    "fear",
       "fraud",    "greedy",  "hate",      "horrible", "hurt",     "ill",      "loss",
       "lost",     "pain",    "panic",     "poor",    "ridiculous", "rude",    "sad",
       "scam",     "scared",  "shame",     "shortage", "sick",     "struggling", "stupid",
       "terrible", "unemployed", "worried", "worry",  "worst"},
      {"cancelled", "delayed", "hoarding", "lockdown", "outage", "overpriced", "recall",
       "refund", "stockpiling", "vaccine"},
      "Read each data instance carefully and assign exactly one label from the label set. "
      "Follow the label rules as written and use the examples as guidance. Base the label only "
      "on the text of the instance."};
  return kLexicon;
}

MockLexicon MockLexicon::from_json_text(const std::string& text) {
  try {
    const auto j = Json::parse(text);
    MockLexicon lex;
    for (const auto& w : j.at("positive")) lex.positive.insert(text::to_lower(w.get<std::string>()));
    for (const auto& w : j.at("negative")) lex.negative.insert(text::to_lower(w.get<std::string>()));
    for (const auto& w : j.value("cues", Json::array()))
      lex.cues.insert(text::to_lower(w.get<std::string>()));
    lex.instruction = j.value("instruction", builtin().instruction);
    return lex;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("invalid mock lexicon: ") + e.what());
  }
}

MockLexicon MockLexicon::load(const std::string& path) {
  return from_json_text(csv::read_file(path));
}

MockDecision mock_decide(const MockLexicon& lexicon, const std::vector<std::string>& labels,
                         const std::vector<std::pair<std::string, std::string>>& rules,
                         const std::vector<std::pair<std::string, std::string>>& shots,
                         const std::string& instance) {
  const auto lowered = text::to_lower(instance);
  for (const auto& label : labels) {
    for (const auto& [rule_label, rule_text] : rules) {
      if (rule_label != label) continue;
      for (const auto& w : contains_directives(rule_text)) {
        if (lowered.find(text::to_lower(w)) != std::string::npos)
          return {label, "The rule contains(\"" + w + "\") applies to this instance."};
      }
    }
  }

  const auto tokens = text::words(instance);
  std::set<std::string> instance_cues;
  for (const auto& t : tokens)
    if (lexicon.cues.count(t)) instance_cues.insert(t);
  if (!instance_cues.empty()) {
    for (const auto& [shot_text, shot_label] : shots) {
      for (const auto& t : text::words(shot_text)) {
        if (instance_cues.count(t))
          return {shot_label, "Resembles the example sharing the cue word '" + t + "'."};
      }
    }
  }

  int pos = 0, neg = 0;
  for (const auto& t : tokens) {
    if (lexicon.positive.count(t)) ++pos;
    if (lexicon.negative.count(t)) ++neg;
  }
  const int ordinal = score_to_ordinal(pos - neg);
  // Spread the five sentiment ordinals over scales of other sizes.
  const auto n = static_cast<int>(labels.size());
  const int index = (n == 5) ? ordinal - 1
                             : static_cast<int>(std::lround((ordinal - 1) * (n - 1) / 4.0));
  return {labels[static_cast<std::size_t>(index)],
          "Sentiment words: " + std::to_string(pos) + " positive, " + std::to_string(neg) +
              " negative."};
}

Completion mock_complete(const MockLexicon& lexicon, const ChatRequest& request) {
  request.validate();
  const auto& prompt = request.last_user_content();
  std::size_t prompt_chars = 0;
  for (const auto& m : request.messages) prompt_chars += m.content.size();

  Completion c;
  c.usage_estimated = true;
  if (prompt.find(kInstructionMarker) != std::string::npos) {
    c.text = lexicon.instruction;
  } else {
    auto parsed = parse_annotation_prompt(prompt);
    if (!parsed)
      throw Error(ErrorCode::UnrecognizedPrompt,
                  "prompt is neither an instruction request nor an annotation prompt");
    for (std::size_t k = 0; k < parsed->instances.size(); ++k) {
      const auto d =
          mock_decide(lexicon, parsed->labels, parsed->rules, parsed->shots, parsed->instances[k]);
      if (parsed->multi) {
        if (k > 0) c.text += std::string(kFragmentSeparator) + "\n";
        c.text += "data-instance-" + std::to_string(k + 1) + "\n";
      }
      c.text += "ANSWER: Label: [" + d.label + "]\n";
      c.text += "EXPLANATION: " + d.explanation + "\n";
    }
  }
  c.usage = {estimate_tokens(prompt_chars), estimate_tokens(c.text.size())};
  return c;
}

}  // namespace darklabel
