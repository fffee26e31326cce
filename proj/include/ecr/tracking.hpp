#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ecr/kalman.hpp"
#include "ecr/keypoints.hpp"

namespace ecr {

struct TrackerParams {
  double iou_floor = 0.1;        // pairs below this IoU are never matched
  double direction_weight = 0.2; // weight of the direction-inconsistency term
  int direction_lag = 3;         // frames between observations for the direction estimate
  int max_age = 30;              // retire after this many consecutive misses
  int min_hits = 3;              // consecutive hits before a track is confirmed
};

// Measurement parameterization: [center_x, center_y, area, aspect].
Eigen::Vector4d box_to_measurement(const Box& b);
Box measurement_to_box(const Eigen::Vector4d& z);

struct TrackState {
  BoxKalmanFilter filter;
  int age = 0;               // frames since creation
  int time_since_update = 0; // frames since last matched observation
  int hit_streak = 0;        // consecutive matched frames
};

// Advances the constant-velocity model one frame and returns the predicted
// box. Misses reset the hit streak before the counter increments.
Box predict(TrackState& state);

struct Track {
  std::int64_t id = 0;  // public id; assigned when the track confirms
  TrackState state;
  std::map<std::int64_t, Detection> observations;
  std::int64_t last_observation_frame = -1;
  Box last_observation_box;
  Vec2 direction_estimate{};  // zero vector when unknown
  bool confirmed = false;

  // Filter snapshot right after the latest measurement update; the anchor
  // for the post-occlusion replay.
  BoxKalmanFilter post_update_filter;
};

struct TrackPrediction {
  int track_index = -1;
  Box predicted_box;
  Vec2 direction_estimate{};
  std::optional<Vec2> last_observation_center;
};

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track_index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

// One-to-one assignment minimizing (1 - IoU) + w_dir * direction
// inconsistency, where the inconsistency is the angle between the track's
// direction estimate and the direction from its last observation to the
// candidate, normalized to [0,1].
AssociationResult associate(const std::vector<TrackPrediction>& predictions,
                            const std::vector<Detection>& detections,
                            const TrackerParams& params);

// Measurement update for a detection matched in the frame right after the
// previous observation.
void update(Track& track, const Detection& detection, std::int64_t frame,
            const TrackerParams& params);

// Observation-centric re-update after a gap: rewinds to the last observed
// state, replays interpolated virtual observations across the gap, then
// applies the real one. A 0-frame gap degenerates to a plain update.
void reupdate_after_gap(Track& track, const Detection& redetection, std::int64_t frame,
                        const TrackerParams& params);

// Full predict/associate/update loop. Frame indices absent from the sequence
// are treated as frames with zero detections. Returns confirmed tracks in id
// order; output is deterministic for identical inputs and params.
std::vector<Track> run_tracker(const FrameSequence& frames, const TrackerParams& params = {});

// Line-delimited (frame, track id, bbox) dump of matched observations.
void dump_tracks(const std::vector<Track>& tracks, std::ostream& out);

}  // namespace ecr
