#pragma once

#include <stdexcept>
#include <string>

namespace darklabel {

/// Machine-readable error codes. The string form of each code is part of the
/// CLI and HTTP contract (`{code, message, details}` bodies, stderr on exit).
enum class ErrorCode {
  // workbook
  DuplicateLabel,
  InvalidLabelScale,
  RowRejected,
  EmptyDataset,
  ReadOnlyQuestion,
  UnknownQuestion,
  UnknownLabel,
  InvalidRule,
  RemoveMissing,
  UnknownTask,
  UnknownDataId,
  UnsupportedVersion,
  MalformedWorkbook,
  Io,
  // sampling
  OutOfRange,
  UnknownGroup,
  InvertedRange,
  NotIndexed,
  // prompt assembly
  MissingAnswer,
  EmptyInstances,
  MixedGroups,
  EmptyRulebook,
  // llm client
  InvalidRequest,
  Transport,
  RateLimited,
  ProviderError,
  UnknownModel,
  UnrecognizedPrompt,
  // annotation engine
  EmptyWorkingSample,
  NoAnswerSection,
  MissingFragment,
  AnnotationInFlight,
  RetryExhausted,
  // evaluation
  LengthMismatch,
  Empty,
  AllExcluded,
  DegenerateConstantVector,
  TooFewBundles,
  InvalidGoldSet,
  // optimizer
  TooFewExamples,
  NoDevItems,
  InvalidConfig,
  // service
  UnknownWorkbook,
  WorkbookExists,
  UnknownEvaluation,
  BadRequest,
  Csv,
  UnknownRoute,
  Unauthorized,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::string details_;
};

}  // namespace darklabel
