#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "darklabel/types.hpp"

namespace darklabel {

/// Literal that identifies an instruction-generation request.
inline constexpr std::string_view kInstructionMarker = "concrete DETAILED task instruction";
/// Separator line between fragments of a multi-instance response.
inline constexpr std::string_view kFragmentSeparator = "======";

/// Renders the instruction-generation request from the Q1..Q5 answers followed
/// by the fixed task-type question. Throws MissingAnswer(question id).
std::string build_instruction_request(const std::vector<ContextAnswer>& context);

/// Hash of the context answers; the cached instructional prompt is reused
/// while this is unchanged.
std::string context_digest(const std::vector<ContextAnswer>& context);

struct PromptInstance {
  std::int64_t data_id = 0;
  std::string group_id;
  std::string text;
};

/// Single-instance template for one instance, multi-instance template with
/// `data-instance-k:` lines otherwise. Throws EmptyInstances or MixedGroups.
std::string compose_annotation_prompt(const PromptBundle& bundle,
                                      std::span<const PromptInstance> instances);

/// Deep copy of the rulebook (scale order, then position) and shots.
/// Throws EmptyRulebook.
PromptBundle snapshot_bundle(const Workbook& wb, InstructionalPrompt instructional);

/// SHA-256 of the prompt rendered for a fixed placeholder instance.
std::string bundle_digest(const PromptBundle& bundle);

}  // namespace darklabel
