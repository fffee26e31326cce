#pragma once

#include <map>
#include <string>
#include <vector>

namespace ecr {

// Instructor-adjustable metric thresholds. Defaults are engineering choices,
// overridable per run via config or --params.
struct MetricParams {
  double entry_gap_general = 1.0;       // seconds
  double entry_gap_second_third = 2.0;  // seconds; gap between entrants 2 and 3
  double penalty_rate = 0.5;            // 1/seconds; lambda of the exponential penalty
  std::map<std::string, std::vector<std::string>> pod_assignment_table;  // "left"/"right" -> pods
  double pod_hold_min = 1.0;       // seconds inside a POD for a capture
  double pod_time_limit = 5.0;     // seconds from entry before POD penalties begin
  double wall_buffer = 0.75;       // meters
  double threat_overlap_min = 2.0; // seconds of continuous box overlap
  bool gaze_required = true;       // require direct gaze for a clearance
  double floor_grid_cell = 0.25;   // meters
  double floor_time_limit = 30.0;  // seconds
  double keypoint_conf = 0.3;      // confidence threshold for usable keypoints
};

// Trajectory and gaze pipeline knobs.
struct MappingParams {
  double alpha_min = 0.2;          // map-space smoothing floor
  double alpha_max = 0.9;          // map-space smoothing ceiling
  double alpha_dist_ref = 0.15;    // meters of motion mapping to alpha = 1 before clamping
  double process_noise = 1.0;      // px^2/frame^2, pixel smoother
  double measurement_noise = 4.0;  // px^2, pixel smoother
  int fallback_lag = 3;            // frames between reference positions for Eq-style velocity
  double max_speed = 6.0;          // m/s continuity bound
  double entry_hysteresis = 0.25;  // seconds interior before an entry counts
  double calibration_tolerance = 0.05;  // meters of allowed reprojection error
  double gaze_half_angle_deg = 10.0;    // half of the 20 degree visual span
};

// Apply "key=value" overrides (the CLI --params mechanism). Unknown keys
// throw BadConfig.
void apply_param_override(MetricParams& metric, MappingParams& mapping, const std::string& key,
                          const std::string& value);

}  // namespace ecr
