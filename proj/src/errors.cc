#include "capdetail/errors.h"

namespace capdetail {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kReferentialIntegrity: return "ReferentialIntegrity";
    case ErrorCode::kDuplicateObjectId: return "DuplicateObjectId";
    case ErrorCode::kUnknownObject: return "UnknownObject";
    case ErrorCode::kInvalidRle: return "InvalidRle";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kZeroImageArea: return "ZeroImageArea";
    case ErrorCode::kZeroLength: return "ZeroLength";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kZeroOriginalIcr: return "ZeroOriginalIcr";
    case ErrorCode::kZeroOriginalAod: return "ZeroOriginalAod";
    case ErrorCode::kMissingItmScore: return "MissingItmScore";
    case ErrorCode::kMissingMetricReport: return "MissingMetricReport";
    case ErrorCode::kTTooLarge: return "TTooLarge";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kInconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::kTooFewRatios: return "TooFewRatios";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kNoGraphInResponse: return "NoGraphInResponse";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace capdetail
