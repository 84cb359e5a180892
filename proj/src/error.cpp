#include "darklabel/error.hpp"

namespace darklabel {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
#define DL_CASE(x) \
  case ErrorCode::x: \
    return #x;
    DL_CASE(DuplicateLabel)
    DL_CASE(InvalidLabelScale)
    DL_CASE(RowRejected)
    DL_CASE(EmptyDataset)
    DL_CASE(ReadOnlyQuestion)
    DL_CASE(UnknownQuestion)
    DL_CASE(UnknownLabel)
    DL_CASE(InvalidRule)
    DL_CASE(RemoveMissing)
    DL_CASE(UnknownTask)
    DL_CASE(UnknownDataId)
    DL_CASE(UnsupportedVersion)
    DL_CASE(MalformedWorkbook)
    DL_CASE(Io)
    DL_CASE(OutOfRange)
    DL_CASE(UnknownGroup)
    DL_CASE(InvertedRange)
    DL_CASE(NotIndexed)
    DL_CASE(MissingAnswer)
    DL_CASE(EmptyInstances)
    DL_CASE(MixedGroups)
    DL_CASE(EmptyRulebook)
    DL_CASE(InvalidRequest)
    DL_CASE(Transport)
    DL_CASE(RateLimited)
    DL_CASE(ProviderError)
    DL_CASE(UnknownModel)
    DL_CASE(UnrecognizedPrompt)
    DL_CASE(EmptyWorkingSample)
    DL_CASE(NoAnswerSection)
    DL_CASE(MissingFragment)
    DL_CASE(AnnotationInFlight)
    DL_CASE(RetryExhausted)
    DL_CASE(LengthMismatch)
    DL_CASE(Empty)
    DL_CASE(AllExcluded)
    DL_CASE(DegenerateConstantVector)
    DL_CASE(TooFewBundles)
    DL_CASE(InvalidGoldSet)
    DL_CASE(TooFewExamples)
    DL_CASE(NoDevItems)
    DL_CASE(InvalidConfig)
    DL_CASE(UnknownWorkbook)
    DL_CASE(WorkbookExists)
    DL_CASE(UnknownEvaluation)
    DL_CASE(BadRequest)
    DL_CASE(Csv)
    DL_CASE(UnknownRoute)
    DL_CASE(Unauthorized)
#undef DL_CASE
  }
  return "Unknown";
}

}  // namespace darklabel
