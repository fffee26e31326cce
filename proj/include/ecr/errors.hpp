#pragma once

#include <stdexcept>
#include <string>

namespace ecr {

enum class ErrorCode {
  // ingest
  MalformedRecord,
  NonMonotonicFrameIndex,
  WrongKeypointCount,
  MissingCalibration,
  DegenerateRoomPolygon,
  UnknownHierarchyNodeReference,
  BadConfig,
  // mapping / homography
  NoHistory,
  DegenerateConfiguration,
  RankDeficient,
  PointAtInfinity,
  CalibrationToleranceExceeded,
  // gaze
  CoincidentPoints,
  NoEars,
  OriginOutsideRoom,
  // metrics
  MissingAssignment,
  // hierarchy
  CycleDetected,
  OrphanNode,
  UnknownMetricBinding,
  NonPositiveWeight,
  // synthetic
  WaypointOutsideRoom,
  // misc
  Io,
  Internal,
};

const char* error_code_name(ErrorCode c);

// Exit-code categories used by the CLI: 1 internal, 2 input/validation,
// 3 tolerance exceeded.
int error_exit_code(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ecr
