#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panav {

enum class ErrorCode {
  // scene_ingest
  kNoScenes,
  kMalformedRecord,
  kMalformedScene,
  kInvalidLayout,
  kInvalidEpisode,
  // grid_maps
  kEmptyAfterFilter,
  kGeometryMismatch,
  // topo_graph
  kNoTraversableCenter,
  kEmptyRoom,
  kMalformedGraph,
  // path_planning
  kUnknownRoom,
  kUnreachable,
  kNotTraversable,
  kSegmentUnreachable,
  // privacy_field
  kEmptySources,
  kDegenerateField,
  kMalformedField,
  // selection
  kNoCandidates,
  kMalformedVerdict,
  kOutOfRange,
  kAllRunsFailed,
  kUnauthorized,
  kTransport,
  // cli / generic
  kInvalidArgument,
  kInvalidConfig,
  kIoFailure,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code. All toolkit failures throw this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace panav
