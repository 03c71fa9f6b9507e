#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace border_forge {

// Machine-readable failure classes shared by the library, the CLI and the
// HTTP service. The string form is part of the external contract.
enum class ErrorCode {
  kParse,
  kIo,
  kGeometryMismatch,
  kOutOfBounds,
  kInvalidMap,
  kInvalidChain,
  kInvalidSegment,
  kSeedOnBarrier,
  kSeedOutOfBounds,
  kSeedNotTraversable,
  kInvalidDelta,
  kEmptySession,
  kNoDraft,
  kNoPath,
  kLethalEndpoint,
  kUnknownFrame,
  kDisconnectedFrames,
  kFrameGraph,
  kParallelRay,
  kBackwardRay,
  kRegistration,
  kEmptyUnion,
  kNotFound,
  kInvalidArgument,
};

// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { kParse, kGeometry, kPlanning, kOther };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  std::string_view class_name() const { return error_code_name(code_); }
  const std::string& detail() const { return detail_; }

  // Position of the border inside a script, when the failure belongs to one.
  std::optional<std::size_t> border_index() const { return border_index_; }
  Error& with_border_index(std::size_t index) {
    border_index_ = index;
    return *this;
  }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> border_index_;
};

}  // namespace border_forge
