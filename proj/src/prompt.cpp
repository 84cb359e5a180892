#include "darklabel/prompt.hpp"

#include "darklabel/digest.hpp"
#include "darklabel/error.hpp"
#include "darklabel/workbook.hpp"

namespace darklabel {

namespace {

constexpr QuestionId kAnsweredQuestions[] = {QuestionId::Q1, QuestionId::Q2, QuestionId::Q3,
                                             QuestionId::Q4, QuestionId::Q5};

const ContextAnswer* lookup(const std::vector<ContextAnswer>& context, QuestionId id) {
  for (const auto& c : context)
    if (c.question_id == id) return &c;
  return nullptr;
}

void render_rules_and_shots(const PromptBundle& bundle, std::string& out) {
  out += bundle.instructional.text;
  out += "\n\n";
  out += "Please ensure each label adheres to its following rules and regulations.\n";
  out += "\n";
  out +=
      "Below are the descriptions of various labels. Please assign the most appropriate label "
      "to each description provided.\n";
  const auto rules = ordered_rules(bundle.rules_snapshot, bundle.label_scale);
  for (const auto& label : bundle.label_scale.labels()) {
    out += "Label '";
    out += label;
    out += "': Assign this label if the tweet meets any of the following criteria:\n";
    for (const auto& r : rules) {
      if (r.label != label) continue;
      out += r.rule_text;
      out += '\n';
    }
  }
  out += '\n';
  if (!bundle.shots_snapshot.empty()) {
    out +=
        "Please refer to the following Shots (Examples for LLMs to Learn) for annotation tasks, "
        "where each instance is corresponded with a label.\n";
    for (const auto& s : bundle.shots_snapshot) {
      out += "Example:```";
      out += s.text;
      out += "''' => Label:```";
      out += s.gold_label;
      out += "'''\n";
    }
    out += '\n';
  }
  out += "Output Format\n";
}

}  // namespace

std::string build_instruction_request(const std::vector<ContextAnswer>& context) {
  std::string out =
      "Here are questions and corresponding answers for a task description.\n"
      "\n"
      "```\n";
  for (auto id : kAnsweredQuestions) {
    const auto* c = lookup(context, id);
    if (!c || c->answer.empty())
      throw Error(ErrorCode::MissingAnswer, "context question is unanswered", to_string(id));
    out += "Question: [" + question_text(id) + "] Answer: [" + c->answer + "]\n";
  }
  out += "Question: [" + question_text(QuestionId::Q6_TASK_TYPE) + "] Answer: [single-class]\n";
  out +=
      "'''\n"
      "\n"
      "Based on task questions and answers, help me generate a concrete DETAILED task "
      "instruction.\n"
      "Provide Instruction ONLY!\n"
      "DO NOT ADD ANY ADDITIONAL INFORMATION NOT INCLUDE IN THE PREVIOUS Q and A!!!\n"
      "This Instruction is generated for LLM!\n";
  return out;
}

std::string context_digest(const std::vector<ContextAnswer>& context) {
  std::string canon;
  for (auto id : kAnsweredQuestions) {
    const auto* c = lookup(context, id);
    canon += to_string(id);
    canon += '\x1f';
    canon += c ? c->answer : std::string{};
    canon += '\x1e';
  }
  return sha256_hex(canon);
}

std::string compose_annotation_prompt(const PromptBundle& bundle,
                                      std::span<const PromptInstance> instances) {
  if (instances.empty()) throw Error(ErrorCode::EmptyInstances, "no instances to annotate");
  for (const auto& inst : instances)
    if (inst.group_id != instances.front().group_id)
      throw Error(ErrorCode::MixedGroups, "instances span more than one group",
                  instances.front().group_id + "," + inst.group_id);

  std::string out;
  render_rules_and_shots(bundle, out);
  if (instances.size() == 1) {
    out += "Your output should consist of two sections: ANSWER and EXPLANATION.\n";
    out += "ANSWER: Label: []\n";
    out += "EXPLANATION: Provide a brief explanation for your label choice.\n";
    out += "The following is the data instance need to be annotated:\n";
    out += "data-instance: " + instances.front().text + "\n";
  } else {
    out +=
        "For each labeled data instance, your output should consist of two sections: ANSWER "
        "and EXPLANATION, with the data instance id. Each label fragment should be divided by "
        "\"======\"\n";
    out += "ANSWER: Label: []\n";
    out += "EXPLANATION: Provide a brief explanation for your label choice.\n";
    out += "The following are data instances from a group that need to be annotated:\n";
    for (std::size_t k = 0; k < instances.size(); ++k)
      out += "data-instance-" + std::to_string(k + 1) + ": " + instances[k].text + "\n";
  }
  return out;
}

PromptBundle snapshot_bundle(const Workbook& wb, InstructionalPrompt instructional) {
  if (wb.rulebook.empty())
    throw Error(ErrorCode::EmptyRulebook, "the rule book needs at least one rule");
  PromptBundle b;
  b.instructional = std::move(instructional);
  b.rules_snapshot = ordered_rules(wb.rulebook, wb.label_scale);
  b.shots_snapshot = wb.shots;
  b.label_scale = wb.label_scale;
  return b;
}

std::string bundle_digest(const PromptBundle& bundle) {
  const PromptInstance canonical{0, "", "<instance>"};
  return sha256_hex(compose_annotation_prompt(bundle, std::span(&canonical, 1)));
}

}  // namespace darklabel
