#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>

#include "ecr/config.hpp"
#include "ecr/geometry.hpp"
#include "ecr/homography.hpp"
#include "ecr/keypoints.hpp"
#include "ecr/tracking.hpp"

namespace ecr {

enum class GazeSource { EyesMidpoint, SingleEye, NoseFallback };

const char* gaze_source_name(GazeSource s);

struct GazeRecord {
  std::int64_t track_id = 0;
  std::int64_t frame_index = 0;
  Vec2 origin;     // pixels
  Vec2 direction;  // unit vector, pixel space
  GazeSource source = GazeSource::EyesMidpoint;
  std::array<Vec2, 3> image_triangle{};               // v0 = origin
  std::optional<std::array<Vec2, 3>> map_triangle_raw;  // projected, unclipped
  std::optional<Polygon> map_triangle;                // projected and clipped to the room
};

// Eye midpoint, single eye, or nose, in that order of preference.
std::optional<std::pair<Vec2, GazeSource>> gaze_origin(
    const std::array<Keypoint, kp::kCount>& keypoints, double conf_threshold);

// Ear midpoint (single valid ear substitutes); absent when no ear qualifies.
std::optional<Vec2> ear_midpoint(const std::array<Keypoint, kp::kCount>& keypoints,
                                 double conf_threshold);

// g = (o - e) / |o - e|; throws CoincidentPoints when the two collapse.
Vec2 gaze_direction(const Vec2& origin, const Vec2& ear_mid);

// Isosceles focus triangle: apex at the origin, arms rotated +-theta from the
// unit direction, each of length `length`.
std::array<Vec2, 3> gaze_triangle(const Vec2& origin, const Vec2& direction, double theta_deg,
                                  double length);

// Distance along the map-space ray to the nearest wall segment or room edge.
// Throws OriginOutsideRoom.
double clip_length_to_walls(const Vec2& origin_map, const Vec2& dir_map, const RoomConfig& config);

// Project the triangle's vertices to the floor and clip against the room.
Polygon project_triangle_to_floor(const Homography& h, const std::array<Vec2, 3>& image_triangle,
                                  const Polygon& room_polygon);

using GazeTable = std::map<std::int64_t, std::map<std::int64_t, GazeRecord>>;  // track -> frame

// Per-track, per-frame gaze records. Frames whose head keypoints cannot
// produce a valid origin/direction, or whose origin projects outside the
// room, have no record; metrics treat those as not-looking.
GazeTable build_gaze_records(const std::vector<Track>& tracks, const Homography& h,
                             const RoomConfig& config);

void dump_gaze(const GazeTable& gaze, std::ostream& out);

}  // namespace ecr
