#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ecr/config.hpp"
#include "ecr/homography.hpp"
#include "ecr/keypoints.hpp"
#include "ecr/params.hpp"
#include "ecr/tracking.hpp"

namespace ecr {

enum class SampleSource { Measured, VelocityFallback, EstimatorOnly };

const char* sample_source_name(SampleSource s);

struct TrajectorySample {
  std::int64_t track_id = 0;
  std::int64_t frame_index = 0;
  Vec2 pixel_position;  // measured foot point, or the velocity prediction
  Vec2 map_position;    // smoothed map-space position, meters
  SampleSource source = SampleSource::Measured;
  bool in_room = false;
  bool in_entry = false;
};

using TrajectoryMap = std::map<std::int64_t, std::vector<TrajectorySample>>;

enum class RoleKind { TeamMember, Enemy, Unknown };

const char* role_kind_name(RoleKind k);

struct AgentRole {
  std::int64_t track_id = 0;
  RoleKind kind = RoleKind::Unknown;
  // Valid for team members only.
  int entry_order = 0;
  double entry_time = 0.0;  // seconds from stream start
  std::int64_t entry_frame = -1;
};

// Mean of the valid ankle/heel/toe keypoints; absent when none qualify.
std::optional<Vec2> foot_position(const std::array<Keypoint, kp::kCount>& keypoints,
                                  double conf_threshold);

// Centroid of the valid non-foot keypoints, else the bbox center. Always
// available for a real detection.
Vec2 reference_position(const Detection& det, double conf_threshold);

// v = (s_t - s_tk) / k.
Vec2 fallback_velocity(const Vec2& s_t, const Vec2& s_tk, int k);

// P_{t+1} = P_t + v.
Vec2 predict_missing_position(const Vec2& last_position, const Vec2& velocity);

// Eq-5-style blend with alpha driven by the displacement magnitude:
// alpha = clamp(d / d_ref, alpha_min, alpha_max).
double map_smoothing_alpha(double displacement, const MappingParams& params);
Vec2 smooth_map_position(const Vec2& current, const Vec2& prev_smoothed, double displacement,
                         const MappingParams& params);

struct PixelSample {
  std::optional<Vec2> foot;       // measured foot position
  std::optional<Vec2> reference;  // alternate-source position (detection present)
};

struct SmoothedPixelSample {
  Vec2 pixel_position;
  Vec2 smoothed;
  SampleSource source = SampleSource::Measured;
};

// Constant-velocity smoothing over a frame-contiguous pixel track. Measured
// foot positions update the filter; frames without feet fall back to the
// velocity prediction from alternate sources (fed to the filter as a pseudo
// measurement); frames with nothing at all coast on the filter prediction.
std::vector<SmoothedPixelSample> smooth_pixel_track(const std::vector<PixelSample>& samples,
                                                    const MappingParams& params);

// Full per-track map trajectories with source tags. Samples outside the room
// polygon are flagged, not dropped. Steps of non-measured samples are bounded
// by max_speed / fps.
TrajectoryMap build_trajectories(const std::vector<Track>& tracks, const Homography& h,
                                 const RoomConfig& config, double fps);

// Team member / enemy / unknown classification from smoothed map trajectories.
// Entry requires a sustained interior stretch (entry_hysteresis seconds) after
// visiting the entry zone; entry order follows entry times.
std::vector<AgentRole> classify_roles(const TrajectoryMap& trajectories, const RoomConfig& config,
                                      double fps);

void dump_trajectories(const TrajectoryMap& trajectories, std::ostream& out);

}  // namespace ecr
