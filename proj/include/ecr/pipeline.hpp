#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/gaze.hpp"
#include "ecr/ingest.hpp"
#include "ecr/mapping.hpp"
#include "ecr/metrics.hpp"
#include "ecr/tracking.hpp"

namespace ecr {

struct AnalysisResult {
  Homography homography;
  std::vector<Track> tracks;
  TrajectoryMap trajectories;
  std::vector<AgentRole> roles;
  GazeTable gaze;
  std::vector<MetricResult> metrics;
};

// track -> map -> gaze -> metrics over one trial. Throws
// CalibrationToleranceExceeded when the homography cannot reproduce the
// calibration pairs within mapping_params.calibration_tolerance.
AnalysisResult analyze_sequence(const FrameSequence& frames, const RoomConfig& config,
                                const TrackerParams& tracker_params = {});

// Estimate and tolerance-check the calibration homography on its own.
Homography calibrate(const RoomConfig& config);

nlohmann::json roles_to_json(const std::vector<AgentRole>& roles);
nlohmann::json metrics_to_json(const std::vector<MetricResult>& metrics);

// The metrics.json document: parameter echo, roles, and metric results.
nlohmann::json analysis_to_json(const AnalysisResult& result, const RoomConfig& config,
                                double fps);

// Reads the "metrics" array of a metrics.json document back into leaf values.
LeafValues leaf_values_from_json(const nlohmann::json& doc);

nlohmann::json score_sheet_to_json(const ScoreSheet& sheet, const CtaHierarchy& hierarchy);

}  // namespace ecr
