#include "ecr/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <json.hpp>

#include "ecr/assignment.hpp"

namespace ecr {

namespace {
constexpr double kForbidden = 1e6;
}

Eigen::Vector4d box_to_measurement(const Box& b) {
  double w = b.width(), h = b.height();
  Vec2 c = b.center();
  return {c.x, c.y, w * h, w / h};
}

Box measurement_to_box(const Eigen::Vector4d& z) {
  double s = std::max(z(2), 1.0);
  double r = std::max(z(3), 1e-6);
  double w = std::sqrt(s * r);
  double h = s / w;
  return Box{z(0) - w / 2.0, z(1) - h / 2.0, z(0) + w / 2.0, z(1) + h / 2.0};
}

Box predict(TrackState& state) {
  if (state.time_since_update > 0) state.hit_streak = 0;
  state.time_since_update += 1;
  state.age += 1;
  state.filter.predict();
  return measurement_to_box(state.filter.measurement_view());
}

static double direction_inconsistency(const TrackPrediction& pred, const Detection& det) {
  if (!pred.last_observation_center) return 0.0;
  auto dir_est = normalized(pred.direction_estimate);
  if (!dir_est) return 0.0;
  auto to_candidate = normalized(det.bbox.center() - *pred.last_observation_center);
  if (!to_candidate) return 0.0;
  double cosang = std::clamp(dot(*dir_est, *to_candidate), -1.0, 1.0);
  return std::acos(cosang) / M_PI;
}

AssociationResult associate(const std::vector<TrackPrediction>& predictions,
                            const std::vector<Detection>& detections,
                            const TrackerParams& params) {
  AssociationResult result;
  int nt = int(predictions.size());
  int nd = int(detections.size());
  if (nt == 0 || nd == 0) {
    for (int i = 0; i < nt; ++i) result.unmatched_tracks.push_back(i);
    for (int j = 0; j < nd; ++j) result.unmatched_detections.push_back(j);
    return result;
  }

  std::vector<std::vector<double>> iou_mat(nt, std::vector<double>(nd));
  std::vector<std::vector<double>> cost(nt, std::vector<double>(nd));
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nd; ++j) {
      double overlap = iou(predictions[i].predicted_box, detections[j].bbox);
      iou_mat[i][j] = overlap;
      if (overlap < params.iou_floor) {
        cost[i][j] = kForbidden;
      } else {
        cost[i][j] = (1.0 - overlap) +
                     params.direction_weight * direction_inconsistency(predictions[i], detections[j]);
      }
    }
  }

  std::vector<int> row_to_col = solve_assignment(cost);
  std::vector<char> det_matched(nd, false);
  for (int i = 0; i < nt; ++i) {
    int j = row_to_col[i];
    if (j >= 0 && iou_mat[i][j] >= params.iou_floor) {
      result.matches.emplace_back(i, j);
      det_matched[j] = true;
    } else {
      result.unmatched_tracks.push_back(i);
    }
  }
  for (int j = 0; j < nd; ++j) {
    if (!det_matched[j]) result.unmatched_detections.push_back(j);
  }
  return result;
}

static void refresh_direction(Track& track, std::int64_t frame, int lag) {
  // Reference observation: latest one at least `lag` frames back, else the
  // oldest available.
  auto it = track.observations.upper_bound(frame - lag);
  const Detection* ref = nullptr;
  if (it != track.observations.begin()) {
    ref = &std::prev(it)->second;
  } else if (!track.observations.empty() &&
             track.observations.begin()->first < frame) {
    ref = &track.observations.begin()->second;
  }
  if (!ref) {
    track.direction_estimate = Vec2{};
    return;
  }
  auto dir = normalized(track.observations.at(frame).bbox.center() - ref->bbox.center());
  track.direction_estimate = dir.value_or(Vec2{});
}

static void finish_update(Track& track, const Detection& detection, std::int64_t frame,
                          const TrackerParams& params) {
  track.state.time_since_update = 0;
  track.state.hit_streak += 1;
  track.observations[frame] = detection;
  track.last_observation_frame = frame;
  track.last_observation_box = detection.bbox;
  refresh_direction(track, frame, params.direction_lag);
  track.post_update_filter = track.state.filter;
}

void update(Track& track, const Detection& detection, std::int64_t frame,
            const TrackerParams& params) {
  track.state.filter.update(box_to_measurement(detection.bbox));
  finish_update(track, detection, frame, params);
}

static Box lerp_box(const Box& a, const Box& b, double t) {
  return Box{a.x1 + (b.x1 - a.x1) * t, a.y1 + (b.y1 - a.y1) * t,
             a.x2 + (b.x2 - a.x2) * t, a.y2 + (b.y2 - a.y2) * t};
}

void reupdate_after_gap(Track& track, const Detection& redetection, std::int64_t frame,
                        const TrackerParams& params) {
  std::int64_t steps = frame - track.last_observation_frame;
  if (steps < 1) steps = 1;
  BoxKalmanFilter filter = track.post_update_filter;
  for (std::int64_t k = 1; k <= steps; ++k) {
    filter.predict();
    Box virt = lerp_box(track.last_observation_box, redetection.bbox,
                        double(k) / double(steps));
    filter.update(box_to_measurement(virt));
  }
  track.state.filter = filter;
  finish_update(track, redetection, frame, params);
}

static Track make_track(const Detection& det, std::int64_t frame) {
  Track t;
  t.state.filter = BoxKalmanFilter(box_to_measurement(det.bbox));
  t.state.hit_streak = 1;
  t.observations[frame] = det;
  t.last_observation_frame = frame;
  t.last_observation_box = det.bbox;
  t.post_update_filter = t.state.filter;
  return t;
}

std::vector<Track> run_tracker(const FrameSequence& frames, const TrackerParams& params) {
  std::vector<Track> live;
  std::vector<Track> retired;
  std::set<std::int64_t> used_ids;
  std::int64_t next_id = 1;

  auto allocate_id = [&](std::optional<std::int64_t> wanted) {
    if (wanted && *wanted > 0 && !used_ids.count(*wanted)) {
      used_ids.insert(*wanted);
      return *wanted;
    }
    while (used_ids.count(next_id)) ++next_id;
    used_ids.insert(next_id);
    return next_id++;
  };

  std::size_t cursor = 0;
  std::int64_t first = frames.first_frame();
  std::int64_t last = frames.last_frame();
  static const std::vector<Detection> kNoDetections;

  for (std::int64_t frame = first; frame <= last; ++frame) {
    const std::vector<Detection>* dets = &kNoDetections;
    if (cursor < frames.frames.size() && frames.frames[cursor].frame_index == frame) {
      dets = &frames.frames[cursor].detections;
      ++cursor;
    }

    std::vector<TrackPrediction> predictions;
    predictions.reserve(live.size());
    for (int i = 0; i < int(live.size()); ++i) {
      TrackPrediction p;
      p.track_index = i;
      p.predicted_box = predict(live[i].state);
      p.direction_estimate = live[i].direction_estimate;
      if (live[i].last_observation_frame >= 0) {
        p.last_observation_center = live[i].last_observation_box.center();
      }
      predictions.push_back(p);
    }

    AssociationResult assoc = associate(predictions, *dets, params);

    for (auto [ti, di] : assoc.matches) {
      Track& t = live[ti];
      if (t.state.time_since_update >= 2) {
        reupdate_after_gap(t, (*dets)[di], frame, params);
      } else {
        update(t, (*dets)[di], frame, params);
      }
    }

    for (int di : assoc.unmatched_detections) {
      Track t = make_track((*dets)[di], frame);
      if ((*dets)[di].track_hint) {
        // Hinted detections confirm immediately so upstream trackers can be
        // passed through; id conflicts fall back to a fresh id.
        t.confirmed = true;
        t.id = allocate_id((*dets)[di].track_hint);
      }
      live.push_back(std::move(t));
    }

    for (Track& t : live) {
      if (!t.confirmed && t.state.hit_streak >= params.min_hits) {
        t.confirmed = true;
        t.id = allocate_id(std::nullopt);
      }
    }

    std::vector<Track> survivors;
    survivors.reserve(live.size());
    for (Track& t : live) {
      if (t.state.time_since_update > params.max_age) {
        if (t.confirmed) retired.push_back(std::move(t));
      } else {
        survivors.push_back(std::move(t));
      }
    }
    live.swap(survivors);
  }

  std::vector<Track> out;
  for (Track& t : retired) {
    if (t.confirmed) out.push_back(std::move(t));
  }
  for (Track& t : live) {
    if (t.confirmed) out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  return out;
}

void dump_tracks(const std::vector<Track>& tracks, std::ostream& out) {
  // Rows ordered by frame, then id, for stable golden files.
  std::vector<std::tuple<std::int64_t, std::int64_t, const Box*>> rows;
  for (const Track& t : tracks) {
    for (const auto& [frame, det] : t.observations) {
      rows.emplace_back(frame, t.id, &det.bbox);
    }
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [frame, id, box] : rows) {
    nlohmann::json rec;
    rec["frame"] = frame;
    rec["track"] = id;
    rec["bbox"] = {box->x1, box->y1, box->x2, box->y2};
    out << rec.dump() << '\n';
  }
}

}  // namespace ecr
