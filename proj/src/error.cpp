#include "border_forge/error.hpp"

namespace border_forge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kGeometryMismatch: return "geometry_mismatch";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kInvalidMap: return "invalid_map";
    case ErrorCode::kInvalidChain: return "invalid_chain";
    case ErrorCode::kInvalidSegment: return "invalid_segment";
    case ErrorCode::kSeedOnBarrier: return "seed_on_barrier";
    case ErrorCode::kSeedOutOfBounds: return "seed_out_of_bounds";
    case ErrorCode::kSeedNotTraversable: return "seed_not_traversable";
    case ErrorCode::kInvalidDelta: return "invalid_delta";
    case ErrorCode::kEmptySession: return "empty_session";
    case ErrorCode::kNoDraft: return "no_draft";
    case ErrorCode::kNoPath: return "no_path";
    case ErrorCode::kLethalEndpoint: return "lethal_endpoint";
    case ErrorCode::kUnknownFrame: return "unknown_frame";
    case ErrorCode::kDisconnectedFrames: return "disconnected_frames";
    case ErrorCode::kFrameGraph: return "frame_graph";
    case ErrorCode::kParallelRay: return "parallel_ray";
    case ErrorCode::kBackwardRay: return "backward_ray";
    case ErrorCode::kRegistration: return "registration";
    case ErrorCode::kEmptyUnion: return "empty_union";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return ErrorCategory::kParse;
    case ErrorCode::kGeometryMismatch:
    case ErrorCode::kOutOfBounds:
      return ErrorCategory::kGeometry;
    case ErrorCode::kNoPath:
    case ErrorCode::kLethalEndpoint:
      return ErrorCategory::kPlanning;
    default:
      return ErrorCategory::kOther;
  }
}

}  // namespace border_forge
