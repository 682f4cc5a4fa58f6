#ifndef CAPDETAIL_ERRORS_H_
#define CAPDETAIL_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace capdetail {

enum class ErrorCode {
  kMalformedDocument,
  kReferentialIntegrity,
  kDuplicateObjectId,
  kUnknownObject,
  kInvalidRle,
  kDimensionMismatch,
  kEmptyInput,
  kZeroImageArea,
  kZeroLength,
  kUnreachable,
  kZeroOriginalIcr,
  kZeroOriginalAod,
  kMissingItmScore,
  kMissingMetricReport,
  kTTooLarge,
  kKTooLarge,
  kLengthMismatch,
  kZeroVariance,
  kInconsistentDimensions,
  kTooFewRatios,
  kMalformedLine,
  kDuplicateId,
  kTransport,
  kNoGraphInResponse,
  kValidationFailed,
  kInvalidArgument,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// batch drivers can report and aggregate by kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace capdetail

#endif  // CAPDETAIL_ERRORS_H_
