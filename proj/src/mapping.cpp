#include "ecr/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "ecr/errors.hpp"
#include "ecr/kalman.hpp"

namespace ecr {

const char* sample_source_name(SampleSource s) {
  switch (s) {
    case SampleSource::Measured: return "measured";
    case SampleSource::VelocityFallback: return "velocity-fallback";
    case SampleSource::EstimatorOnly: return "estimator-only";
  }
  return "measured";
}

const char* role_kind_name(RoleKind k) {
  switch (k) {
    case RoleKind::TeamMember: return "team_member";
    case RoleKind::Enemy: return "enemy";
    case RoleKind::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Vec2> foot_position(const std::array<Keypoint, kp::kCount>& keypoints,
                                  double conf_threshold) {
  Vec2 sum{};
  int n = 0;
  for (int idx : kp::kFootSet) {
    const Keypoint& k = keypoints[idx];
    if (validate_keypoint(k, conf_threshold)) {
      sum += k.point();
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / double(n);
}

Vec2 reference_position(const Detection& det, double conf_threshold) {
  Vec2 sum{};
  int n = 0;
  for (int i = 0; i < kp::kCount; ++i) {
    if (std::find(kp::kFootSet.begin(), kp::kFootSet.end(), i) != kp::kFootSet.end()) continue;
    if (validate_keypoint(det.keypoints[i], conf_threshold)) {
      sum += det.keypoints[i].point();
      ++n;
    }
  }
  if (n > 0) return sum / double(n);
  return det.bbox.center();
}

Vec2 fallback_velocity(const Vec2& s_t, const Vec2& s_tk, int k) {
  if (k < 1) throw Error(ErrorCode::NoHistory, "velocity lag must be >= 1 frame");
  return (s_t - s_tk) / double(k);
}

Vec2 predict_missing_position(const Vec2& last_position, const Vec2& velocity) {
  return last_position + velocity;
}

double map_smoothing_alpha(double displacement, const MappingParams& params) {
  double alpha = params.alpha_dist_ref > 0 ? displacement / params.alpha_dist_ref : 1.0;
  return std::clamp(alpha, params.alpha_min, params.alpha_max);
}

Vec2 smooth_map_position(const Vec2& current, const Vec2& prev_smoothed, double displacement,
                         const MappingParams& params) {
  double alpha = map_smoothing_alpha(displacement, params);
  return current * alpha + prev_smoothed * (1.0 - alpha);
}

std::vector<SmoothedPixelSample> smooth_pixel_track(const std::vector<PixelSample>& samples,
                                                    const MappingParams& params) {
  std::vector<SmoothedPixelSample> out;
  out.reserve(samples.size());
  PointKalmanFilter filter(params.process_noise, params.measurement_noise);
  std::optional<Vec2> last_position;  // last foot-based or predicted position

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (filter.initialized()) filter.predict();
    SmoothedPixelSample s;

    if (samples[i].foot) {
      s.pixel_position = *samples[i].foot;
      s.source = SampleSource::Measured;
      filter.update({s.pixel_position.x, s.pixel_position.y});
    } else if (samples[i].reference) {
      // Velocity from the alternate-source history, preferring the configured
      // lag when a reference exists there.
      std::optional<Vec2> prev_ref;
      int lag = 0;
      int want = int(i) - params.fallback_lag;
      if (want >= 0 && samples[want].reference) {
        prev_ref = samples[want].reference;
        lag = params.fallback_lag;
      } else {
        for (int j = int(i) - 1; j >= 0; --j) {
          if (samples[j].reference) {
            prev_ref = samples[j].reference;
            lag = int(i) - j;
            break;
          }
        }
      }
      if (prev_ref && last_position) {
        Vec2 v = fallback_velocity(*samples[i].reference, *prev_ref, lag);
        s.pixel_position = predict_missing_position(*last_position, v);
      } else {
        // No usable history yet: the alternate source itself is the best guess.
        s.pixel_position = *samples[i].reference;
      }
      s.source = SampleSource::VelocityFallback;
      filter.update({s.pixel_position.x, s.pixel_position.y});
    } else {
      if (!filter.initialized()) {
        // Nothing to anchor the track yet; hold at last known or origin.
        s.pixel_position = last_position.value_or(Vec2{});
        filter.update({s.pixel_position.x, s.pixel_position.y});
      } else {
        Eigen::Vector2d p = filter.position();
        s.pixel_position = {p.x(), p.y()};
      }
      s.source = SampleSource::EstimatorOnly;
    }

    Eigen::Vector2d post = filter.position();
    s.smoothed = {post.x(), post.y()};
    last_position = s.pixel_position;
    out.push_back(s);
  }
  return out;
}

TrajectoryMap build_trajectories(const std::vector<Track>& tracks, const Homography& h,
                                 const RoomConfig& config, double fps) {
  TrajectoryMap result;
  double conf = config.metric_params.keypoint_conf;
  double max_step = config.mapping_params.max_speed / fps;

  for (const Track& track : tracks) {
    if (track.observations.empty()) continue;
    std::int64_t first = track.observations.begin()->first;
    std::int64_t last = track.observations.rbegin()->first;

    std::vector<PixelSample> pixel_samples;
    pixel_samples.reserve(std::size_t(last - first + 1));
    for (std::int64_t frame = first; frame <= last; ++frame) {
      PixelSample ps;
      auto it = track.observations.find(frame);
      if (it != track.observations.end()) {
        ps.foot = foot_position(it->second.keypoints, conf);
        ps.reference = reference_position(it->second, conf);
      }
      pixel_samples.push_back(ps);
    }

    std::vector<SmoothedPixelSample> smoothed = smooth_pixel_track(pixel_samples,
                                                                   config.mapping_params);

    std::vector<TrajectorySample>& out = result[track.id];
    out.reserve(smoothed.size());
    std::optional<Vec2> prev_map;
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
      TrajectorySample ts;
      ts.track_id = track.id;
      ts.frame_index = first + std::int64_t(i);
      ts.pixel_position = smoothed[i].pixel_position;
      ts.source = smoothed[i].source;

      Vec2 raw_map;
      try {
        raw_map = h.project(smoothed[i].smoothed);
      } catch (const Error&) {
        raw_map = prev_map.value_or(Vec2{});  // degenerate projection: hold position
      }

      Vec2 map_pos;
      if (!prev_map) {
        map_pos = raw_map;
      } else {
        double displacement = (raw_map - *prev_map).norm();
        map_pos = smooth_map_position(raw_map, *prev_map, displacement, config.mapping_params);
        if (ts.source != SampleSource::Measured) {
          Vec2 step = map_pos - *prev_map;
          double len = step.norm();
          if (len > max_step) map_pos = *prev_map + step * (max_step / len);
        }
      }
      ts.map_position = map_pos;
      ts.in_room = point_in_polygon(map_pos, config.room_polygon);
      ts.in_entry = point_in_polygon(map_pos, config.entry_zone);
      prev_map = map_pos;
      out.push_back(ts);
    }
  }
  return result;
}

std::vector<AgentRole> classify_roles(const TrajectoryMap& trajectories, const RoomConfig& config,
                                      double fps) {
  int hysteresis_frames = std::max(1, int(std::ceil(config.mapping_params.entry_hysteresis * fps)));

  std::vector<AgentRole> roles;
  for (const auto& [track_id, samples] : trajectories) {
    AgentRole role;
    role.track_id = track_id;

    auto interior = [](const TrajectorySample& s) { return s.in_room && !s.in_entry; };

    bool ever_in_entry = false;
    std::ptrdiff_t first_zone = -1, first_interior = -1;
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(samples.size()); ++i) {
      if (samples[i].in_entry) {
        ever_in_entry = true;
        if (first_zone < 0) first_zone = i;
      }
      if (first_interior < 0 && interior(samples[i])) first_interior = i;
    }

    if (first_zone >= 0 && (first_interior < 0 || first_zone < first_interior)) {
      // Crossed the entry zone first: find the sustained interior stretch.
      for (std::ptrdiff_t i = first_zone + 1; i < std::ptrdiff_t(samples.size()); ++i) {
        if (!interior(samples[i])) continue;
        bool sustained = true;
        for (std::ptrdiff_t j = i; j < std::min<std::ptrdiff_t>(i + hysteresis_frames,
                                                                samples.size());
             ++j) {
          if (samples[j].in_entry) {
            sustained = false;
            break;
          }
        }
        if (sustained) {
          role.kind = RoleKind::TeamMember;
          role.entry_frame = samples[i].frame_index;
          role.entry_time = double(samples[i].frame_index) / fps;
          break;
        }
      }
    } else if (first_interior >= 0 && !ever_in_entry) {
      role.kind = RoleKind::Enemy;
    }
    roles.push_back(role);
  }

  // Entry order by entry time, ties by track id.
  std::vector<AgentRole*> members;
  for (AgentRole& r : roles) {
    if (r.kind == RoleKind::TeamMember) members.push_back(&r);
  }
  std::sort(members.begin(), members.end(), [](const AgentRole* a, const AgentRole* b) {
    return a->entry_time != b->entry_time ? a->entry_time < b->entry_time
                                          : a->track_id < b->track_id;
  });
  for (std::size_t i = 0; i < members.size(); ++i) members[i]->entry_order = int(i) + 1;
  return roles;
}

void dump_trajectories(const TrajectoryMap& trajectories, std::ostream& out) {
  std::vector<const TrajectorySample*> rows;
  for (const auto& [id, samples] : trajectories) {
    for (const TrajectorySample& s : samples) rows.push_back(&s);
  }
  std::sort(rows.begin(), rows.end(), [](const TrajectorySample* a, const TrajectorySample* b) {
    return a->frame_index != b->frame_index ? a->frame_index < b->frame_index
                                            : a->track_id < b->track_id;
  });
  for (const TrajectorySample* s : rows) {
    nlohmann::json rec;
    rec["frame"] = s->frame_index;
    rec["track"] = s->track_id;
    rec["x_m"] = s->map_position.x;
    rec["y_m"] = s->map_position.y;
    rec["source"] = sample_source_name(s->source);
    rec["in_room"] = s->in_room;
    out << rec.dump() << '\n';
  }
}

}  // namespace ecr
