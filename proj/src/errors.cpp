#include "ecr/errors.hpp"

namespace ecr {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::NonMonotonicFrameIndex: return "NonMonotonicFrameIndex";
    case ErrorCode::WrongKeypointCount: return "WrongKeypointCount";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::DegenerateRoomPolygon: return "DegenerateRoomPolygon";
    case ErrorCode::UnknownHierarchyNodeReference: return "UnknownHierarchyNodeReference";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::NoHistory: return "NoHistory";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::CalibrationToleranceExceeded: return "CalibrationToleranceExceeded";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::NoEars: return "NoEars";
    case ErrorCode::OriginOutsideRoom: return "OriginOutsideRoom";
    case ErrorCode::MissingAssignment: return "MissingAssignment";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::UnknownMetricBinding: return "UnknownMetricBinding";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::WaypointOutsideRoom: return "WaypointOutsideRoom";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

int error_exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::CalibrationToleranceExceeded:
      return 3;
    case ErrorCode::Internal:
      return 1;
    default:
      return 2;
  }
}

}  // namespace ecr
