#include "panav/error.hpp"

namespace panav {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoScenes: return "NoScenes";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMalformedScene: return "MalformedScene";
    case ErrorCode::kInvalidLayout: return "InvalidLayout";
    case ErrorCode::kInvalidEpisode: return "InvalidEpisode";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kGeometryMismatch: return "GeometryMismatch";
    case ErrorCode::kNoTraversableCenter: return "NoTraversableCenter";
    case ErrorCode::kEmptyRoom: return "EmptyRoom";
    case ErrorCode::kMalformedGraph: return "MalformedGraph";
    case ErrorCode::kUnknownRoom: return "UnknownRoom";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kNotTraversable: return "NotTraversable";
    case ErrorCode::kSegmentUnreachable: return "SegmentUnreachable";
    case ErrorCode::kEmptySources: return "EmptySources";
    case ErrorCode::kDegenerateField: return "DegenerateField";
    case ErrorCode::kMalformedField: return "MalformedField";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kMalformedVerdict: return "MalformedVerdict";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kAllRunsFailed: return "AllRunsFailed";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace panav
