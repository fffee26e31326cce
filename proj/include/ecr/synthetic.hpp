#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/gaze.hpp"
#include "ecr/ingest.hpp"
#include "ecr/mapping.hpp"
#include "ecr/metrics.hpp"
#include "ecr/rollup.hpp"
#include "ecr/tracking.hpp"

namespace ecr {

struct Waypoint {
  double t = 0.0;  // seconds
  Vec2 pos;        // meters
};

struct GazeKey {
  double t = 0.0;
  double heading_deg = 0.0;  // map-space heading; linearly interpolated
};

struct AgentScript {
  std::string name;
  RoleKind role = RoleKind::TeamMember;
  double body_scale = 1.0;
  std::vector<Waypoint> waypoints;  // strictly increasing t; agent exists from the first t on
  std::vector<GazeKey> gaze;        // empty: face the direction of motion
};

struct OcclusionWindow {
  int agent = 0;  // index into ScenarioScript::agents
  std::int64_t from_frame = 0;
  std::int64_t to_frame = 0;  // inclusive
};

struct NoiseModel {
  double keypoint_sigma_px = 0.0;
  double dropout_prob = 0.0;
  double foot_dropout_prob = 0.0;   // applied to ankle/heel/toe keypoints instead
  double head_dropout_prob = -1.0;  // eyes/ears/nose; < 0 follows dropout_prob
  std::vector<OcclusionWindow> occlusions;
};

struct ScenarioScript {
  RoomConfig room;
  double fps = 30.0;
  double duration_s = 10.0;
  std::uint64_t seed = 0;
  NoiseModel noise;
  std::vector<AgentScript> agents;
};

struct AgentTruth {
  std::string name;
  RoleKind role = RoleKind::TeamMember;
  std::int64_t first_frame = 0;
  std::vector<Vec2> positions;       // indexed from first_frame
  std::vector<double> headings_rad;  // map-space
  std::vector<Detection> detections; // noiseless render, same indexing
};

struct GroundTruth {
  double fps = 30.0;
  std::int64_t frame_count = 0;
  std::vector<AgentTruth> agents;
};

ScenarioScript parse_scenario(const nlohmann::json& doc);
ScenarioScript load_scenario_file(const std::string& path);

nlohmann::json ground_truth_to_json(const GroundTruth& truth);

// Places a canonical 26-point skeleton template at each scripted position
// (map space, scaled by body size, oriented by heading), projects it to
// pixels through the inverse calibration homography, and applies seeded
// noise, dropouts, and occlusion windows. Deterministic per seed.
std::pair<FrameSequence, GroundTruth> render_scenario(const ScenarioScript& script);

// Engine-facing context built directly from ground truth: exact positions,
// per-agent tracks with noiseless observations, roles and gaze records from
// the engine's own constructors. The baseline for metric differential tests.
struct TruthContext {
  std::vector<Track> tracks;
  TrajectoryMap trajectories;
  std::vector<AgentRole> roles;
  GazeTable gaze;
  Homography homography;
};

TruthContext make_truth_context(const ScenarioScript& script, const GroundTruth& truth);

// Identity switches of a tracker output against the truth: per-frame nearest
// match by box center, counted whenever an agent's matched track id changes.
int oracle_track_assignment(const std::vector<Track>& tracker_output, const GroundTruth& truth);

// Brute-force per-frame recomputation of one metric from ground truth. Shares
// nothing with the metrics module but the definitions: geometry predicates,
// interval logic and penalties are reimplemented locally. Returns nullopt for
// NotApplicable, mirroring the metric's applicability rules.
std::optional<double> oracle_metric(const std::string& name, const ScenarioScript& script,
                                    const GroundTruth& truth);

// Literal recursive evaluation of the weighted roll-up and smoothing
// formulas, for differential tests against run_rollup.
ScoreSheet oracle_rollup(const CtaHierarchy& h, const std::vector<LeafValues>& per_trial_leaves);

// Seeded scenario generator used by fuzz and differential suites: staggered
// entries, wall-following runs to sampled PODs, optional static enemies, and
// gaze behaviors drawn from a small archetype set.
ScenarioScript random_scenario(std::uint64_t seed, const RoomConfig& base);

}  // namespace ecr
