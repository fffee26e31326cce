#include "ecr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ecr/errors.hpp"

namespace ecr {

double exponential_penalty(double delay_over, double rate) {
  if (delay_over <= 0.0) return 1.0;
  return std::exp(-rate * delay_over);
}

const char* entry_side_name(EntrySide s) {
  return s == EntrySide::Left ? "left" : "right";
}

MetricContext::MetricContext(const TrajectoryMap& trajectories_,
                             const std::vector<AgentRole>& roles_,
                             const std::vector<Track>& tracks_, const GazeTable& gaze_,
                             const RoomConfig& config_, double fps_)
    : trajectories(trajectories_),
      roles(roles_),
      tracks(tracks_),
      gaze(gaze_),
      config(config_),
      fps(fps_) {
  for (const AgentRole& r : roles) {
    if (r.kind == RoleKind::TeamMember) members.push_back(r);
    if (r.kind == RoleKind::Enemy) enemy_ids.push_back(r.track_id);
  }
  std::sort(members.begin(), members.end(),
            [](const AgentRole& a, const AgentRole& b) { return a.entry_order < b.entry_order; });
  for (const Track& t : tracks) track_by_id[t.id] = &t;

  bool any = false;
  for (const auto& [id, samples] : trajectories) {
    auto& index = sample_index_[id];
    for (const TrajectorySample& s : samples) {
      index[s.frame_index] = &s;
      if (!any) {
        first_frame = last_frame = s.frame_index;
        any = true;
      } else {
        first_frame = std::min(first_frame, s.frame_index);
        last_frame = std::max(last_frame, s.frame_index);
      }
    }
  }
}

const TrajectorySample* MetricContext::sample_at(std::int64_t track_id, std::int64_t frame) const {
  auto it = sample_index_.find(track_id);
  if (it == sample_index_.end()) return nullptr;
  auto jt = it->second.find(frame);
  return jt == it->second.end() ? nullptr : jt->second;
}

const Detection* MetricContext::observation_at(std::int64_t track_id, std::int64_t frame) const {
  auto it = track_by_id.find(track_id);
  if (it == track_by_id.end()) return nullptr;
  auto jt = it->second->observations.find(frame);
  return jt == it->second->observations.end() ? nullptr : &jt->second;
}

const GazeRecord* MetricContext::gaze_at(std::int64_t track_id, std::int64_t frame) const {
  auto it = gaze.find(track_id);
  if (it == gaze.end()) return nullptr;
  auto jt = it->second.find(frame);
  return jt == it->second.end() ? nullptr : &jt->second;
}

std::optional<EntrySide> entry_direction(const MetricContext& ctx, const AgentRole& member) {
  if (member.kind != RoleKind::TeamMember) return std::nullopt;
  const TrajectorySample* start = ctx.sample_at(member.track_id, member.entry_frame);
  if (!start) return std::nullopt;
  std::int64_t window = std::int64_t(std::llround(0.5 * ctx.fps));
  const TrajectorySample* end = nullptr;
  for (std::int64_t f = member.entry_frame + window; f > member.entry_frame && !end; --f) {
    end = ctx.sample_at(member.track_id, f);
  }
  if (!end) return std::nullopt;
  Vec2 move = end->map_position - start->map_position;
  Vec2 door_normal = polygon_centroid(ctx.config.room_polygon) -
                     polygon_centroid(ctx.config.entry_zone);
  auto n = normalized(door_normal);
  if (!n || move.norm() < 1e-12) return std::nullopt;
  return cross(*n, move) > 0.0 ? EntrySide::Left : EntrySide::Right;
}

MetricResult entrance_vectors(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "entrance_vectors";
  if (ctx.members.size() < 2) return r;

  std::vector<std::optional<EntrySide>> sides;
  for (const AgentRole& m : ctx.members) {
    auto side = entry_direction(ctx, m);
    sides.push_back(side);
    if (side) {
      r.per_agent[m.track_id] = (*side == EntrySide::Left) ? 1.0 : 0.0;
      r.evidence.push_back({m.entry_frame, m.entry_frame,
                            "entrant " + std::to_string(m.entry_order) + " moved " +
                                entry_side_name(*side)});
    }
  }
  int pairs = 0, alternating = 0;
  for (std::size_t i = 0; i + 1 < sides.size(); ++i) {
    if (!sides[i] || !sides[i + 1]) continue;
    ++pairs;
    if (*sides[i] != *sides[i + 1]) ++alternating;
  }
  if (pairs == 0) return r;
  r.score = double(alternating) / double(pairs);
  return r;
}

MetricResult entrance_hesitation(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "entrance_hesitation";
  if (ctx.members.size() < 2) return r;

  const MetricParams& p = ctx.config.metric_params;
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i + 1 < ctx.members.size(); ++i) {
    double gap = ctx.members[i + 1].entry_time - ctx.members[i].entry_time;
    // The 2nd->3rd entrant gap gets the longer dedicated threshold.
    double threshold = (i == 1) ? p.entry_gap_second_third : p.entry_gap_general;
    double penalty = exponential_penalty(gap - threshold, p.penalty_rate);
    sum += penalty;
    ++count;
    r.per_agent[ctx.members[i + 1].track_id] = penalty;
    r.evidence.push_back({ctx.members[i].entry_frame, ctx.members[i + 1].entry_frame,
                          "gap " + std::to_string(gap) + " s vs threshold " +
                              std::to_string(threshold) + " s"});
  }
  r.score = sum / double(count);
  return r;
}

namespace {

struct PodAssignment {
  std::int64_t track_id = 0;
  std::string pod;
  std::optional<std::int64_t> first_arrival_frame;  // first frame inside the pod
  std::optional<double> capture_time;               // start of the qualifying hold, seconds
};

std::vector<PodAssignment> assign_and_score_pods(const MetricContext& ctx) {
  std::vector<PodAssignment> assignments;
  if (ctx.members.empty()) return assignments;

  auto first_side = entry_direction(ctx, ctx.members.front());
  if (!first_side) return assignments;
  auto table_it =
      ctx.config.metric_params.pod_assignment_table.find(entry_side_name(*first_side));
  if (table_it == ctx.config.metric_params.pod_assignment_table.end()) {
    throw Error(ErrorCode::MissingAssignment,
                std::string("pod table lacks first-entry direction '") +
                    entry_side_name(*first_side) + "'");
  }
  const std::vector<std::string>& pods = table_it->second;

  int hold_frames = std::max(1, int(std::ceil(ctx.config.metric_params.pod_hold_min * ctx.fps)));

  for (std::size_t i = 0; i < ctx.members.size() && i < pods.size(); ++i) {
    PodAssignment a;
    a.track_id = ctx.members[i].track_id;
    a.pod = pods[i];
    auto pod_it = ctx.config.pod_regions.find(a.pod);
    if (pod_it == ctx.config.pod_regions.end()) {
      throw Error(ErrorCode::MissingAssignment, "pod region '" + a.pod + "' not in config");
    }
    const Polygon& region = pod_it->second;

    auto traj_it = ctx.trajectories.find(a.track_id);
    if (traj_it != ctx.trajectories.end()) {
      int run = 0;
      for (const TrajectorySample& s : traj_it->second) {
        if (s.frame_index < ctx.members[i].entry_frame) continue;
        bool inside = point_in_polygon(s.map_position, region);
        if (inside) {
          if (!a.first_arrival_frame) a.first_arrival_frame = s.frame_index;
          ++run;
          if (run >= hold_frames && !a.capture_time) {
            a.capture_time = double(s.frame_index - run + 1) / ctx.fps;
          }
        } else {
          run = 0;
        }
      }
    }
    assignments.push_back(std::move(a));
  }
  return assignments;
}

}  // namespace

MetricResult identify_capture_pod(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "identify_capture_pod";
  std::vector<PodAssignment> assignments = assign_and_score_pods(ctx);
  if (assignments.empty()) return r;

  int captured = 0;
  for (const PodAssignment& a : assignments) {
    bool ok = a.capture_time.has_value();
    if (ok) ++captured;
    r.per_agent[a.track_id] = ok ? 1.0 : 0.0;
    r.evidence.push_back({0, 0, "pod '" + a.pod + "' " + (ok ? "captured" : "not captured")});
  }
  r.score = double(captured) / double(assignments.size());
  return r;
}

MetricResult pod_capture_time(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "pod_capture_time";
  std::vector<PodAssignment> assignments = assign_and_score_pods(ctx);
  if (assignments.empty()) return r;

  const MetricParams& p = ctx.config.metric_params;
  double sum = 0.0;
  for (const PodAssignment& a : assignments) {
    double contribution = 0.0;
    if (a.capture_time) {
      double entry_time = 0.0;
      for (const AgentRole& m : ctx.members) {
        if (m.track_id == a.track_id) entry_time = m.entry_time;
      }
      double delay = (*a.capture_time - entry_time) - p.pod_time_limit;
      contribution = exponential_penalty(delay, p.penalty_rate);
    }
    sum += contribution;
    r.per_agent[a.track_id] = contribution;
  }
  r.score = sum / double(assignments.size());
  return r;
}

MetricResult move_along_wall(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "move_along_wall";
  if (ctx.members.empty()) return r;

  std::vector<PodAssignment> assignments;
  try {
    assignments = assign_and_score_pods(ctx);
  } catch (const Error&) {
    // No usable pod table: evaluate over the full post-entry trajectory.
  }
  std::map<std::int64_t, std::int64_t> arrival;
  for (const PodAssignment& a : assignments) {
    if (a.first_arrival_frame) arrival[a.track_id] = *a.first_arrival_frame;
  }

  std::vector<Segment> walls = ctx.config.all_walls();
  const double buffer = ctx.config.metric_params.wall_buffer;

  double sum = 0.0;
  int counted = 0;
  for (const AgentRole& m : ctx.members) {
    auto traj_it = ctx.trajectories.find(m.track_id);
    if (traj_it == ctx.trajectories.end()) continue;
    // Frames strictly before the first POD arrival; the whole run if never.
    std::int64_t stop = ctx.last_frame + 1;
    auto arr = arrival.find(m.track_id);
    if (arr != arrival.end()) stop = arr->second;

    int in_buffer = 0, total = 0;
    for (const TrajectorySample& s : traj_it->second) {
      if (s.frame_index < m.entry_frame || s.frame_index >= stop) continue;
      ++total;
      double best = std::numeric_limits<double>::max();
      for (const Segment& w : walls) best = std::min(best, dist_point_segment(s.map_position, w));
      if (best <= buffer) ++in_buffer;
    }
    if (total == 0) continue;
    double fraction = double(in_buffer) / double(total);
    sum += fraction;
    ++counted;
    r.per_agent[m.track_id] = fraction;
    r.evidence.push_back({m.entry_frame, stop,
                          std::to_string(in_buffer) + "/" + std::to_string(total) +
                              " frames inside the wall buffer"});
  }
  if (counted == 0) return r;
  r.score = sum / double(counted);
  return r;
}

namespace {

// Per-enemy clearance instant, if any: the earliest moment a continuous
// member overlap has lasted threat_overlap_min with a wrist contact and
// (when required) a direct gaze observed inside that window.
std::map<std::int64_t, std::optional<double>> clearance_analysis(const MetricContext& ctx) {
  std::map<std::int64_t, std::optional<double>> result;
  const MetricParams& p = ctx.config.metric_params;
  int overlap_frames = std::max(1, int(std::ceil(p.threat_overlap_min * ctx.fps)));

  for (std::int64_t enemy_id : ctx.enemy_ids) {
    std::optional<double> cleared;
    for (const AgentRole& m : ctx.members) {
      // Walk the shared frame range and track maximal overlap runs.
      std::int64_t run_start = -1;
      std::int64_t first_wrist = -1, first_gaze = -1;
      for (std::int64_t f = ctx.first_frame; f <= ctx.last_frame + 1; ++f) {
        const Detection* enemy_obs = ctx.observation_at(enemy_id, f);
        const Detection* member_obs = ctx.observation_at(m.track_id, f);
        bool overlapping = f <= ctx.last_frame && enemy_obs && member_obs &&
                           iou(member_obs->bbox, enemy_obs->bbox) > 0.0;
        if (overlapping) {
          if (run_start < 0) {
            run_start = f;
            first_wrist = first_gaze = -1;
          }
          if (first_wrist < 0) {
            for (int widx : {kp::kLWrist, kp::kRWrist}) {
              const Keypoint& wrist = member_obs->keypoints[widx];
              if (validate_keypoint(wrist, p.keypoint_conf) &&
                  enemy_obs->bbox.contains(wrist.point())) {
                first_wrist = f;
                break;
              }
            }
          }
          if (first_gaze < 0) {
            const GazeRecord* g = ctx.gaze_at(m.track_id, f);
            if (g && triangle_intersects_box(g->image_triangle[0], g->image_triangle[1],
                                             g->image_triangle[2], enemy_obs->bbox)) {
              first_gaze = f;
            }
          }
        } else if (run_start >= 0) {
          std::int64_t run_len = f - run_start;
          if (run_len >= overlap_frames && first_wrist >= 0 &&
              (!p.gaze_required || first_gaze >= 0)) {
            double t_duration = double(run_start + overlap_frames - 1) / ctx.fps;
            double t = std::max(t_duration, double(first_wrist) / ctx.fps);
            if (p.gaze_required) t = std::max(t, double(first_gaze) / ctx.fps);
            if (!cleared || t < *cleared) cleared = t;
          }
          run_start = -1;
        }
      }
    }
    result[enemy_id] = cleared;
  }
  return result;
}

}  // namespace

MetricResult threat_clearance(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "threat_clearance";
  if (ctx.enemy_ids.empty()) return r;

  auto clearance = clearance_analysis(ctx);
  int cleared = 0;
  for (std::int64_t enemy_id : ctx.enemy_ids) {
    bool ok = clearance[enemy_id].has_value();
    if (ok) ++cleared;
    r.per_agent[enemy_id] = ok ? 1.0 : 0.0;
    if (ok) {
      std::int64_t f = std::int64_t(std::llround(*clearance[enemy_id] * ctx.fps));
      r.evidence.push_back({f, f, "enemy " + std::to_string(enemy_id) + " cleared at " +
                                      std::to_string(*clearance[enemy_id]) + " s"});
    } else {
      r.evidence.push_back({ctx.first_frame, ctx.last_frame,
                            "enemy " + std::to_string(enemy_id) + " not cleared"});
    }
  }
  r.score = double(cleared) / double(ctx.enemy_ids.size());
  return r;
}

MetricResult threat_coverage(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "threat_coverage";
  if (ctx.enemy_ids.empty()) return r;

  auto clearance = clearance_analysis(ctx);
  std::map<std::int64_t, std::pair<int, int>> per_enemy;  // watched, qualifying
  int watched = 0, qualifying = 0;

  for (std::int64_t f = ctx.first_frame; f <= ctx.last_frame; ++f) {
    bool member_present = false;
    for (const AgentRole& m : ctx.members) {
      const TrajectorySample* s = ctx.sample_at(m.track_id, f);
      if (s && s->in_room) {
        member_present = true;
        break;
      }
    }
    if (!member_present) continue;

    for (std::int64_t enemy_id : ctx.enemy_ids) {
      const Detection* enemy_obs = ctx.observation_at(enemy_id, f);
      if (!enemy_obs) continue;
      auto cleared = clearance[enemy_id];
      if (cleared && double(f) / ctx.fps >= *cleared) continue;  // already cleared

      ++qualifying;
      per_enemy[enemy_id].second += 1;
      for (const AgentRole& m : ctx.members) {
        const GazeRecord* g = ctx.gaze_at(m.track_id, f);
        if (g && triangle_intersects_box(g->image_triangle[0], g->image_triangle[1],
                                         g->image_triangle[2], enemy_obs->bbox)) {
          ++watched;
          per_enemy[enemy_id].first += 1;
          break;
        }
      }
    }
  }
  if (qualifying == 0) return r;
  r.score = double(watched) / double(qualifying);
  for (const auto& [enemy_id, counts] : per_enemy) {
    r.per_agent[enemy_id] =
        counts.second > 0 ? double(counts.first) / double(counts.second) : 0.0;
  }
  return r;
}

MetricResult teammate_coverage(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "teammate_coverage";
  if (ctx.members.size() < 2) return r;

  int team_frames = 0, unseen_frames = 0;
  for (const AgentRole& m : ctx.members) {
    int my_frames = 0, my_unseen = 0;
    for (std::int64_t f = ctx.first_frame; f <= ctx.last_frame; ++f) {
      const TrajectorySample* s = ctx.sample_at(m.track_id, f);
      const Detection* obs = ctx.observation_at(m.track_id, f);
      if (!s || !s->in_room || !obs) continue;
      ++my_frames;

      bool teammate_present = false;
      bool seen = false;
      for (const AgentRole& other : ctx.members) {
        if (other.track_id == m.track_id) continue;
        const TrajectorySample* os = ctx.sample_at(other.track_id, f);
        if (!os || !os->in_room) continue;
        teammate_present = true;
        const GazeRecord* g = ctx.gaze_at(other.track_id, f);
        if (g && triangle_intersects_box(g->image_triangle[0], g->image_triangle[1],
                                         g->image_triangle[2], obs->bbox)) {
          seen = true;
          break;
        }
      }
      if (teammate_present && !seen) ++my_unseen;
    }
    team_frames += my_frames;
    unseen_frames += my_unseen;
    if (my_frames > 0) {
      r.per_agent[m.track_id] = 1.0 - double(my_unseen) / double(my_frames);
    }
  }
  if (team_frames == 0) return r;
  r.score = 1.0 - double(unseen_frames) / double(team_frames);
  return r;
}

CoverageGrid compute_coverage(const MetricContext& ctx) {
  CoverageGrid grid;
  grid.cell = ctx.config.metric_params.floor_grid_cell;
  Box bounds = polygon_bounds(ctx.config.room_polygon);
  grid.origin = {bounds.x1, bounds.y1};
  grid.nx = std::max(1, int(std::ceil(bounds.width() / grid.cell)));
  grid.ny = std::max(1, int(std::ceil(bounds.height() / grid.cell)));
  grid.interior.assign(std::size_t(grid.nx) * grid.ny, 0);
  grid.covered.assign(std::size_t(grid.nx) * grid.ny, 0);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (point_in_polygon(grid.center(ix, iy), ctx.config.room_polygon)) {
        grid.interior[grid.index(ix, iy)] = 1;
        ++grid.interior_count;
      }
    }
  }
  if (grid.interior_count == 0) return grid;

  for (std::int64_t f = ctx.first_frame; f <= ctx.last_frame; ++f) {
    for (const AgentRole& m : ctx.members) {
      const GazeRecord* g = ctx.gaze_at(m.track_id, f);
      if (!g || !g->map_triangle_raw) continue;
      const auto& tri = *g->map_triangle_raw;
      // Restrict the scan to the triangle's bounding cells.
      Box tb = polygon_bounds({tri[0], tri[1], tri[2]});
      int ix0 = std::max(0, int((tb.x1 - grid.origin.x) / grid.cell) - 1);
      int iy0 = std::max(0, int((tb.y1 - grid.origin.y) / grid.cell) - 1);
      int ix1 = std::min(grid.nx - 1, int((tb.x2 - grid.origin.x) / grid.cell) + 1);
      int iy1 = std::min(grid.ny - 1, int((tb.y2 - grid.origin.y) / grid.cell) + 1);
      for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
          int idx = grid.index(ix, iy);
          if (!grid.interior[idx] || grid.covered[idx]) continue;
          if (point_in_triangle(grid.center(ix, iy), tri[0], tri[1], tri[2])) {
            grid.covered[idx] = 1;
            ++grid.covered_count;
          }
        }
      }
    }
    if (!grid.first_full_time && grid.covered_count == grid.interior_count) {
      grid.first_full_time = double(f) / ctx.fps;
    }
  }
  return grid;
}

MetricResult floor_coverage(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "floor_coverage";
  if (ctx.members.empty()) return r;  // no run to score
  CoverageGrid grid = compute_coverage(ctx);
  if (grid.interior_count == 0) return r;
  r.score = double(grid.covered_count) / double(grid.interior_count);
  r.evidence.push_back({ctx.first_frame, ctx.last_frame,
                        std::to_string(grid.covered_count) + "/" +
                            std::to_string(grid.interior_count) + " cells covered"});
  return r;
}

MetricResult total_floor_coverage_time(const MetricContext& ctx) {
  MetricResult r;
  r.metric_name = "total_floor_coverage_time";
  if (ctx.members.empty()) return r;
  CoverageGrid grid = compute_coverage(ctx);
  if (grid.interior_count == 0) return r;
  if (!grid.first_full_time) {
    r.score = 0.0;
    r.evidence.push_back({ctx.first_frame, ctx.last_frame, "floor never fully covered"});
    return r;
  }
  double delay = *grid.first_full_time - ctx.config.metric_params.floor_time_limit;
  r.score = exponential_penalty(delay, ctx.config.metric_params.penalty_rate);
  r.evidence.push_back({std::int64_t(std::llround(*grid.first_full_time * ctx.fps)),
                        std::int64_t(std::llround(*grid.first_full_time * ctx.fps)),
                        "full coverage at " + std::to_string(*grid.first_full_time) + " s"});
  return r;
}

std::vector<MetricResult> compute_all_metrics(const MetricContext& ctx) {
  return {
      entrance_vectors(ctx),  entrance_hesitation(ctx), identify_capture_pod(ctx),
      pod_capture_time(ctx),  move_along_wall(ctx),     threat_clearance(ctx),
      threat_coverage(ctx),   teammate_coverage(ctx),   floor_coverage(ctx),
      total_floor_coverage_time(ctx),
  };
}

LeafValues metric_leaf_values(const std::vector<MetricResult>& results) {
  LeafValues values;
  for (const MetricResult& r : results) values[r.metric_name] = r.score;
  return values;
}

}  // namespace ecr
