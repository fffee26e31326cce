#include "ecr/gaze.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "ecr/errors.hpp"

namespace ecr {

const char* gaze_source_name(GazeSource s) {
  switch (s) {
    case GazeSource::EyesMidpoint: return "eyes-midpoint";
    case GazeSource::SingleEye: return "single-eye";
    case GazeSource::NoseFallback: return "nose-fallback";
  }
  return "eyes-midpoint";
}

std::optional<std::pair<Vec2, GazeSource>> gaze_origin(
    const std::array<Keypoint, kp::kCount>& keypoints, double conf_threshold) {
  bool left = validate_keypoint(keypoints[kp::kLEye], conf_threshold);
  bool right = validate_keypoint(keypoints[kp::kREye], conf_threshold);
  if (left && right) {
    Vec2 mid = (keypoints[kp::kLEye].point() + keypoints[kp::kREye].point()) * 0.5;
    return std::make_pair(mid, GazeSource::EyesMidpoint);
  }
  if (left) return std::make_pair(keypoints[kp::kLEye].point(), GazeSource::SingleEye);
  if (right) return std::make_pair(keypoints[kp::kREye].point(), GazeSource::SingleEye);
  if (validate_keypoint(keypoints[kp::kNose], conf_threshold)) {
    return std::make_pair(keypoints[kp::kNose].point(), GazeSource::NoseFallback);
  }
  return std::nullopt;
}

std::optional<Vec2> ear_midpoint(const std::array<Keypoint, kp::kCount>& keypoints,
                                 double conf_threshold) {
  bool left = validate_keypoint(keypoints[kp::kLEar], conf_threshold);
  bool right = validate_keypoint(keypoints[kp::kREar], conf_threshold);
  if (left && right) {
    return (keypoints[kp::kLEar].point() + keypoints[kp::kREar].point()) * 0.5;
  }
  if (left) return keypoints[kp::kLEar].point();
  if (right) return keypoints[kp::kREar].point();
  return std::nullopt;
}

Vec2 gaze_direction(const Vec2& origin, const Vec2& ear_mid) {
  Vec2 d = origin - ear_mid;
  double n = d.norm();
  if (n < 1e-6) {
    throw Error(ErrorCode::CoincidentPoints, "gaze origin coincides with ear midpoint");
  }
  return d / n;
}

std::array<Vec2, 3> gaze_triangle(const Vec2& origin, const Vec2& direction, double theta_deg,
                                  double length) {
  double theta = theta_deg * M_PI / 180.0;
  Vec2 v1 = origin + rotate(direction, theta) * length;
  Vec2 v2 = origin + rotate(direction, -theta) * length;
  return {origin, v1, v2};
}

double clip_length_to_walls(const Vec2& origin_map, const Vec2& dir_map,
                            const RoomConfig& config) {
  if (!point_in_polygon(origin_map, config.room_polygon)) {
    throw Error(ErrorCode::OriginOutsideRoom,
                "gaze origin (" + std::to_string(origin_map.x) + ", " +
                    std::to_string(origin_map.y) + ") outside the room");
  }
  double best = std::numeric_limits<double>::max();
  for (const Segment& wall : config.all_walls()) {
    auto t = ray_segment_distance(origin_map, dir_map, wall);
    if (t && *t > 1e-9) best = std::min(best, *t);
  }
  if (best == std::numeric_limits<double>::max()) {
    // A closed room always terminates the ray; reaching here means the origin
    // sits exactly on the boundary pointing outward.
    return 0.0;
  }
  return best;
}

Polygon project_triangle_to_floor(const Homography& h, const std::array<Vec2, 3>& image_triangle,
                                  const Polygon& room_polygon) {
  Polygon projected;
  projected.reserve(3);
  for (const Vec2& v : image_triangle) projected.push_back(h.project(v));
  return clip_polygon_convex(projected, room_polygon);
}

GazeTable build_gaze_records(const std::vector<Track>& tracks, const Homography& h,
                             const RoomConfig& config) {
  GazeTable table;
  double conf = config.metric_params.keypoint_conf;
  double half_angle = config.mapping_params.gaze_half_angle_deg;
  Homography h_inv = h.inverse();

  for (const Track& track : tracks) {
    for (const auto& [frame, det] : track.observations) {
      auto origin = gaze_origin(det.keypoints, conf);
      if (!origin) continue;
      auto ears = ear_midpoint(det.keypoints, conf);
      if (!ears) continue;

      Vec2 dir_px;
      try {
        dir_px = gaze_direction(origin->first, *ears);
      } catch (const Error&) {
        continue;  // degenerate head pose this frame
      }

      GazeRecord rec;
      rec.track_id = track.id;
      rec.frame_index = frame;
      rec.origin = origin->first;
      rec.direction = dir_px;
      rec.source = origin->second;

      try {
        Vec2 origin_map = h.project(rec.origin);
        if (!point_in_polygon(origin_map, config.room_polygon)) continue;
        auto dir_map = normalized(h.project(rec.origin + dir_px) - origin_map);
        if (!dir_map) continue;
        double len_map = clip_length_to_walls(origin_map, *dir_map, config);
        if (len_map < 1e-9) continue;
        Vec2 end_px = h_inv.project(origin_map + *dir_map * len_map);
        double len_px = (end_px - rec.origin).norm();
        if (len_px < 1e-9) continue;
        rec.image_triangle = gaze_triangle(rec.origin, dir_px, half_angle, len_px);
        rec.map_triangle_raw = {h.project(rec.image_triangle[0]),
                                h.project(rec.image_triangle[1]),
                                h.project(rec.image_triangle[2])};
        Polygon clipped = clip_polygon_convex(
            {(*rec.map_triangle_raw)[0], (*rec.map_triangle_raw)[1], (*rec.map_triangle_raw)[2]},
            config.room_polygon);
        if (!clipped.empty()) rec.map_triangle = std::move(clipped);
      } catch (const Error&) {
        continue;  // projection degenerate at this pose
      }

      table[track.id][frame] = std::move(rec);
    }
  }
  return table;
}

void dump_gaze(const GazeTable& gaze, std::ostream& out) {
  std::vector<const GazeRecord*> rows;
  for (const auto& [id, per_frame] : gaze) {
    for (const auto& [frame, rec] : per_frame) rows.push_back(&rec);
  }
  std::sort(rows.begin(), rows.end(), [](const GazeRecord* a, const GazeRecord* b) {
    return a->frame_index != b->frame_index ? a->frame_index < b->frame_index
                                            : a->track_id < b->track_id;
  });
  for (const GazeRecord* rec : rows) {
    nlohmann::json j;
    j["frame"] = rec->frame_index;
    j["track"] = rec->track_id;
    j["origin"] = {rec->origin.x, rec->origin.y};
    j["direction"] = {rec->direction.x, rec->direction.y};
    j["source"] = gaze_source_name(rec->source);
    nlohmann::json tri = nlohmann::json::array();
    for (const Vec2& v : rec->image_triangle) tri.push_back({v.x, v.y});
    j["triangle"] = tri;
    if (rec->map_triangle) {
      nlohmann::json mt = nlohmann::json::array();
      for (const Vec2& v : *rec->map_triangle) mt.push_back({v.x, v.y});
      j["map_triangle"] = mt;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace ecr
