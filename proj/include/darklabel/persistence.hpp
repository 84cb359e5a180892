#pragma once

#include <string>

#include <json.hpp>

#include "darklabel/types.hpp"

namespace darklabel {

inline constexpr const char* kSchemaVersion = "1";

using Json = nlohmann::json;

// JSON mappings for the persisted document. Field names follow the workbook
// schema; optional fields are written as null.
void to_json(Json& j, const LabelScale& s);
void from_json(const Json& j, LabelScale& s);
void to_json(Json& j, const DatasetRow& r);
void from_json(const Json& j, DatasetRow& r);
void to_json(Json& j, const ContextAnswer& c);
void from_json(const Json& j, ContextAnswer& c);
void to_json(Json& j, const LabelRule& r);
void from_json(const Json& j, LabelRule& r);
void to_json(Json& j, const Shot& s);
void from_json(const Json& j, Shot& s);
void to_json(Json& j, const SampleEntry& e);
void from_json(const Json& j, SampleEntry& e);
void to_json(Json& j, const Usage& u);
void from_json(const Json& j, Usage& u);
void to_json(Json& j, const InstructionalPrompt& p);
void from_json(const Json& j, InstructionalPrompt& p);
void to_json(Json& j, const PromptBundle& b);
void from_json(const Json& j, PromptBundle& b);
void to_json(Json& j, const AnnotationResult& r);
void from_json(const Json& j, AnnotationResult& r);
void to_json(Json& j, const TaskRecord& t);
void from_json(const Json& j, TaskRecord& t);

Json workbook_to_json(const Workbook& wb);
/// Throws UnsupportedVersion or MalformedWorkbook.
Workbook workbook_from_json(const Json& j);

void save_workbook(const Workbook& wb, const std::string& path);
Workbook load_workbook(const std::string& path);

}  // namespace darklabel
