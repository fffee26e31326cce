#include "ecr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "ecr/errors.hpp"

namespace ecr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Skeleton template: map-space offsets (meters) in the agent's local frame,
// +x along the heading. The exact proportions are arbitrary but frozen; the
// six-point foot set averages to the agent's true position by construction.
// ---------------------------------------------------------------------------
static const Vec2 kTemplate[kp::kCount] = {
    {0.24, 0.00},    // nose
    {0.20, 0.04},    // left eye
    {0.20, -0.04},   // right eye
    {-0.05, 0.09},   // left ear
    {-0.05, -0.09},  // right ear
    {0.00, 0.20},    // left shoulder
    {0.00, -0.20},   // right shoulder
    {0.10, 0.28},    // left elbow
    {0.10, -0.28},   // right elbow
    {0.34, 0.24},    // left wrist
    {0.34, -0.24},   // right wrist
    {-0.02, 0.12},   // left hip
    {-0.02, -0.12},  // right hip
    {0.04, 0.11},    // left knee
    {0.04, -0.11},   // right knee
    {0.00, 0.10},    // left ankle
    {0.00, -0.10},   // right ankle
    {0.10, 0.00},    // head
    {0.00, 0.00},    // neck
    {-0.02, 0.00},   // hip center
    {0.15, 0.10},    // left big toe
    {0.15, -0.10},   // right big toe
    {0.13, 0.16},    // left small toe
    {0.13, -0.16},   // right small toe
    {-0.15, 0.10},   // left heel
    {-0.15, -0.10},  // right heel
};

static constexpr double kValidConf = 0.95;
static constexpr double kDroppedConf = 0.05;
static constexpr double kBoxPadPx = 2.0;

namespace {

// Deterministic uniform/normal draws independent of library distributions.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) {
    next();
    next();
  }
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

Vec2 interp_position(const std::vector<Waypoint>& wps, double t) {
  if (t <= wps.front().t) return wps.front().pos;
  if (t >= wps.back().t) return wps.back().pos;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    if (t <= wps[i + 1].t) {
      double span = wps[i + 1].t - wps[i].t;
      double u = span > 0 ? (t - wps[i].t) / span : 0.0;
      return wps[i].pos + (wps[i + 1].pos - wps[i].pos) * u;
    }
  }
  return wps.back().pos;
}

double motion_heading(const std::vector<Waypoint>& wps, double t, double fallback) {
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    if (t >= wps[i].t && t < wps[i + 1].t) {
      Vec2 d = wps[i + 1].pos - wps[i].pos;
      if (d.norm() > 1e-9) return std::atan2(d.y, d.x);
    }
  }
  // After the last waypoint (or stationary): hold the last moving direction.
  for (std::size_t i = wps.size(); i-- > 1;) {
    Vec2 d = wps[i].pos - wps[i - 1].pos;
    if (d.norm() > 1e-9) return std::atan2(d.y, d.x);
  }
  return fallback;
}

double interp_heading(const AgentScript& agent, double t) {
  if (agent.gaze.empty()) return motion_heading(agent.waypoints, t, 0.0);
  const auto& keys = agent.gaze;
  if (t <= keys.front().t) return keys.front().heading_deg * M_PI / 180.0;
  if (t >= keys.back().t) return keys.back().heading_deg * M_PI / 180.0;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (t <= keys[i + 1].t) {
      double span = keys[i + 1].t - keys[i].t;
      double u = span > 0 ? (t - keys[i].t) / span : 0.0;
      double deg = keys[i].heading_deg + (keys[i + 1].heading_deg - keys[i].heading_deg) * u;
      return deg * M_PI / 180.0;
    }
  }
  return keys.back().heading_deg * M_PI / 180.0;
}

}  // namespace

ScenarioScript parse_scenario(const json& doc) {
  ScenarioScript script;
  if (!doc.contains("room_config")) {
    throw Error(ErrorCode::BadConfig, "scenario requires an inline room_config");
  }
  script.room = load_room_config(doc.at("room_config"));
  script.fps = doc.value("fps", 30.0);
  script.duration_s = doc.value("duration_s", 10.0);
  script.seed = doc.value("seed", std::uint64_t(0));
  if (!(script.fps > 0) || !(script.duration_s > 0)) {
    throw Error(ErrorCode::BadConfig, "fps and duration_s must be > 0");
  }
  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    script.noise.keypoint_sigma_px = n.value("keypoint_sigma_px", 0.0);
    script.noise.dropout_prob = n.value("dropout_prob", 0.0);
    script.noise.foot_dropout_prob = n.value("foot_dropout_prob", 0.0);
    script.noise.head_dropout_prob = n.value("head_dropout_prob", -1.0);
    if (n.contains("occlusions")) {
      for (const json& o : n.at("occlusions")) {
        OcclusionWindow w;
        w.agent = o.at("agent").get<int>();
        w.from_frame = o.at("from_frame").get<std::int64_t>();
        w.to_frame = o.at("to_frame").get<std::int64_t>();
        script.noise.occlusions.push_back(w);
      }
    }
  }
  if (!doc.contains("agents") || doc.at("agents").empty()) {
    throw Error(ErrorCode::BadConfig, "scenario requires agents");
  }
  for (const json& a : doc.at("agents")) {
    AgentScript agent;
    agent.name = a.value("name", "agent" + std::to_string(script.agents.size()));
    std::string role = a.value("role", "member");
    agent.role = role == "enemy" ? RoleKind::Enemy : RoleKind::TeamMember;
    agent.body_scale = a.value("body_scale", 1.0);
    double prev_t = -1.0;
    for (const json& w : a.at("waypoints")) {
      Waypoint wp;
      wp.t = w.at("t").get<double>();
      wp.pos = {w.at("x").get<double>(), w.at("y").get<double>()};
      if (wp.t <= prev_t) {
        throw Error(ErrorCode::BadConfig,
                    "agent " + agent.name + ": waypoint timestamps must increase");
      }
      prev_t = wp.t;
      if (!point_in_polygon(wp.pos, script.room.room_polygon) &&
          !point_in_polygon(wp.pos, script.room.entry_zone)) {
        throw Error(ErrorCode::WaypointOutsideRoom,
                    "agent " + agent.name + ": waypoint at t=" + std::to_string(wp.t) +
                        " outside room and entry zone");
      }
      agent.waypoints.push_back(wp);
    }
    if (a.contains("gaze")) {
      for (const json& g : a.at("gaze")) {
        agent.gaze.push_back({g.at("t").get<double>(), g.at("heading_deg").get<double>()});
      }
    }
    script.agents.push_back(std::move(agent));
  }
  return script;
}

ScenarioScript load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("scenario parse failure: ") + e.what());
  }
  return parse_scenario(doc);
}

json ground_truth_to_json(const GroundTruth& truth) {
  json doc;
  doc["fps"] = truth.fps;
  doc["frames"] = truth.frame_count;
  json agents = json::array();
  for (const AgentTruth& a : truth.agents) {
    json ja;
    ja["name"] = a.name;
    ja["role"] = role_kind_name(a.role);
    ja["first_frame"] = a.first_frame;
    json samples = json::array();
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
      samples.push_back({{"f", a.first_frame + std::int64_t(i)},
                         {"x", a.positions[i].x},
                         {"y", a.positions[i].y},
                         {"heading_deg", a.headings_rad[i] * 180.0 / M_PI}});
    }
    ja["samples"] = std::move(samples);
    agents.push_back(std::move(ja));
  }
  doc["agents"] = std::move(agents);
  return doc;
}

static Detection render_detection(const Vec2& pos, double heading, double scale,
                                  const Homography& map_to_pixel, std::int64_t frame) {
  Detection det;
  det.frame_index = frame;
  double lo_x = 0, lo_y = 0, hi_x = 0, hi_y = 0;
  for (int i = 0; i < kp::kCount; ++i) {
    Vec2 map_pt = pos + rotate(kTemplate[i] * scale, heading);
    Vec2 px = map_to_pixel.project(map_pt);
    det.keypoints[i] = Keypoint{px.x, px.y, kValidConf};
    if (i == 0) {
      lo_x = hi_x = px.x;
      lo_y = hi_y = px.y;
    } else {
      lo_x = std::min(lo_x, px.x);
      hi_x = std::max(hi_x, px.x);
      lo_y = std::min(lo_y, px.y);
      hi_y = std::max(hi_y, px.y);
    }
  }
  det.bbox = Box{lo_x - kBoxPadPx, lo_y - kBoxPadPx, hi_x + kBoxPadPx, hi_y + kBoxPadPx};
  return det;
}

std::pair<FrameSequence, GroundTruth> render_scenario(const ScenarioScript& script) {
  Homography pixel_to_map = estimate_homography(script.room.calibration_pairs);
  Homography map_to_pixel = pixel_to_map.inverse();

  std::int64_t frames = std::int64_t(std::llround(script.duration_s * script.fps));
  GroundTruth truth;
  truth.fps = script.fps;
  truth.frame_count = frames;

  for (const AgentScript& agent : script.agents) {
    AgentTruth at;
    at.name = agent.name;
    at.role = agent.role;
    at.first_frame =
        std::int64_t(std::ceil(agent.waypoints.front().t * script.fps - 1e-9));
    for (std::int64_t f = at.first_frame; f < frames; ++f) {
      double t = double(f) / script.fps;
      Vec2 pos = interp_position(agent.waypoints, t);
      double heading = interp_heading(agent, t);
      at.positions.push_back(pos);
      at.headings_rad.push_back(heading);
      at.detections.push_back(
          render_detection(pos, heading, agent.body_scale, map_to_pixel, f));
    }
    truth.agents.push_back(std::move(at));
  }

  Rng rng(script.seed);
  FrameSequence seq;
  seq.fps = script.fps;

  auto occluded = [&](int agent, std::int64_t frame) {
    for (const OcclusionWindow& w : script.noise.occlusions) {
      if (w.agent == agent && frame >= w.from_frame && frame <= w.to_frame) return true;
    }
    return false;
  };

  for (std::int64_t f = 0; f < frames; ++f) {
    Frame frame_out;
    frame_out.frame_index = f;
    for (std::size_t a = 0; a < script.agents.size(); ++a) {
      const AgentTruth& at = truth.agents[a];
      if (f < at.first_frame || occluded(int(a), f)) continue;
      Detection det = at.detections[std::size_t(f - at.first_frame)];

      double sigma = script.noise.keypoint_sigma_px;
      if (sigma > 0) {
        det.bbox.x1 += rng.normal() * sigma;
        det.bbox.y1 += rng.normal() * sigma;
        det.bbox.x2 += rng.normal() * sigma;
        det.bbox.y2 += rng.normal() * sigma;
      }
      for (int i = 0; i < kp::kCount; ++i) {
        bool is_foot =
            std::find(kp::kFootSet.begin(), kp::kFootSet.end(), i) != kp::kFootSet.end();
        bool is_head = i == kp::kNose || i == kp::kLEye || i == kp::kREye || i == kp::kLEar ||
                       i == kp::kREar;
        double drop_p = script.noise.dropout_prob;
        if (is_foot) drop_p = std::max(drop_p, script.noise.foot_dropout_prob);
        if (is_head && script.noise.head_dropout_prob >= 0.0) {
          drop_p = script.noise.head_dropout_prob;
        }
        if (drop_p > 0 && rng.uniform() < drop_p) {
          det.keypoints[i] = Keypoint{0.0, 0.0, kDroppedConf};
          continue;
        }
        if (sigma > 0) {
          det.keypoints[i].x += rng.normal() * sigma;
          det.keypoints[i].y += rng.normal() * sigma;
        }
      }
      frame_out.detections.push_back(std::move(det));
    }
    if (!frame_out.detections.empty()) seq.frames.push_back(std::move(frame_out));
  }
  return {std::move(seq), std::move(truth)};
}

TruthContext make_truth_context(const ScenarioScript& script, const GroundTruth& truth) {
  TruthContext ctx;
  ctx.homography = estimate_homography(script.room.calibration_pairs);
  Homography map_to_pixel = ctx.homography.inverse();

  for (std::size_t a = 0; a < truth.agents.size(); ++a) {
    const AgentTruth& at = truth.agents[a];
    Track track;
    track.id = std::int64_t(a) + 1;
    track.confirmed = true;
    for (std::size_t i = 0; i < at.detections.size(); ++i) {
      std::int64_t f = at.first_frame + std::int64_t(i);
      track.observations[f] = at.detections[i];
      track.last_observation_frame = f;
      track.last_observation_box = at.detections[i].bbox;
    }
    ctx.tracks.push_back(std::move(track));

    std::vector<TrajectorySample>& samples = ctx.trajectories[std::int64_t(a) + 1];
    for (std::size_t i = 0; i < at.positions.size(); ++i) {
      TrajectorySample s;
      s.track_id = std::int64_t(a) + 1;
      s.frame_index = at.first_frame + std::int64_t(i);
      s.map_position = at.positions[i];
      s.pixel_position = map_to_pixel.project(at.positions[i]);
      s.source = SampleSource::Measured;
      s.in_room = point_in_polygon(s.map_position, script.room.room_polygon);
      s.in_entry = point_in_polygon(s.map_position, script.room.entry_zone);
      samples.push_back(s);
    }
  }
  ctx.roles = classify_roles(ctx.trajectories, script.room, script.fps);
  ctx.gaze = build_gaze_records(ctx.tracks, ctx.homography, script.room);
  return ctx;
}

int oracle_track_assignment(const std::vector<Track>& tracker_output, const GroundTruth& truth) {
  // Gate: generous multiple of a typical body box diagonal, in pixels.
  double gate = 0.0;
  for (const AgentTruth& a : truth.agents) {
    if (!a.detections.empty()) {
      const Box& b = a.detections.front().bbox;
      gate = std::max(gate, 1.5 * std::hypot(b.width(), b.height()));
    }
  }

  std::vector<std::vector<std::int64_t>> matched(truth.agents.size());
  for (std::int64_t f = 0; f < truth.frame_count; ++f) {
    for (std::size_t a = 0; a < truth.agents.size(); ++a) {
      const AgentTruth& at = truth.agents[a];
      if (f < at.first_frame) continue;
      Vec2 center = at.detections[std::size_t(f - at.first_frame)].bbox.center();
      std::int64_t best_id = -1;
      double best_d = gate;
      for (const Track& t : tracker_output) {
        auto it = t.observations.find(f);
        if (it == t.observations.end()) continue;
        double d = (it->second.bbox.center() - center).norm();
        if (d < best_d) {
          best_d = d;
          best_id = t.id;
        }
      }
      if (best_id >= 0) matched[a].push_back(best_id);
    }
  }

  int switches = 0;
  for (const auto& ids : matched) {
    for (std::size_t i = 1; i < ids.size(); ++i) {
      if (ids[i] != ids[i - 1]) ++switches;
    }
  }
  return switches;
}

// ---------------------------------------------------------------------------
// Oracle: brute-force per-frame metric evaluation, independent of the metrics
// module. Geometry predicates and interval logic are reimplemented here.
// ---------------------------------------------------------------------------
namespace oracle {

struct Mat3 {
  double m[3][3];
  Vec2 apply(const Vec2& p) const {
    double x = m[0][0] * p.x + m[0][1] * p.y + m[0][2];
    double y = m[1][0] * p.x + m[1][1] * p.y + m[1][2];
    double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    return {x / w, y / w};
  }
  Mat3 inverse() const {
    double a = m[0][0], b = m[0][1], c = m[0][2];
    double d = m[1][0], e = m[1][1], f = m[1][2];
    double g = m[2][0], h = m[2][1], i = m[2][2];
    double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    Mat3 r;
    r.m[0][0] = (e * i - f * h) / det;
    r.m[0][1] = (c * h - b * i) / det;
    r.m[0][2] = (b * f - c * e) / det;
    r.m[1][0] = (f * g - d * i) / det;
    r.m[1][1] = (a * i - c * g) / det;
    r.m[1][2] = (c * d - a * f) / det;
    r.m[2][0] = (d * h - e * g) / det;
    r.m[2][1] = (b * g - a * h) / det;
    r.m[2][2] = (a * e - b * d) / det;
    return r;
  }
};

Mat3 from_homography(const Homography& h) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.m[i][j] = h.matrix()(i, j);
  }
  return r;
}

bool in_poly(const Vec2& p, const Polygon& poly) {
  // Winding-free crossing test with explicit boundary inclusion.
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    Vec2 ab = b - a, ap = p - a;
    double crossv = ab.x * ap.y - ab.y * ap.x;
    double scale = std::max(1.0, ab.norm() * ap.norm());
    if (std::abs(crossv) <= 1e-12 * scale) {
      if (p.x >= std::min(a.x, b.x) - 1e-12 && p.x <= std::max(a.x, b.x) + 1e-12 &&
          p.y >= std::min(a.y, b.y) - 1e-12 && p.y <= std::max(a.y, b.y) + 1e-12) {
        return true;
      }
    }
  }
  int crossings = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    if ((a.y <= p.y && b.y > p.y) || (b.y <= p.y && a.y > p.y)) {
      double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x_at > p.x) ++crossings;
    }
  }
  return crossings % 2 == 1;
}

bool in_tri(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  auto side = [](const Vec2& u, const Vec2& v, const Vec2& q) {
    return (v.x - u.x) * (q.y - u.y) - (v.y - u.y) * (q.x - u.x);
  };
  double s1 = side(a, b, p), s2 = side(b, c, p), s3 = side(c, a, p);
  return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

double seg_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 <= 0) return (p - a).norm();
  double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
  t = std::max(0.0, std::min(1.0, t));
  Vec2 q{a.x + ab.x * t, a.y + ab.y * t};
  return (p - q).norm();
}

bool segs_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  };
  int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  auto on = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
  };
  if (o1 == 0 && on(p1, p2, q1)) return true;
  if (o2 == 0 && on(p1, p2, q2)) return true;
  if (o3 == 0 && on(q1, q2, p1)) return true;
  if (o4 == 0 && on(q1, q2, p2)) return true;
  return false;
}

// Triangle/box overlap via containment or edge crossings (exact for closed
// sets; an algorithmically different route than the SAT used by the engine).
bool tri_box(const Vec2& a, const Vec2& b, const Vec2& c, const Box& box) {
  Vec2 corners[4] = {{box.x1, box.y1}, {box.x2, box.y1}, {box.x2, box.y2}, {box.x1, box.y2}};
  for (const Vec2& p : corners) {
    if (in_tri(p, a, b, c)) return true;
  }
  for (const Vec2& v : {a, b, c}) {
    if (v.x >= box.x1 && v.x <= box.x2 && v.y >= box.y1 && v.y <= box.y2) return true;
  }
  Vec2 tri[3] = {a, b, c};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segs_cross(tri[i], tri[(i + 1) % 3], corners[j], corners[(j + 1) % 4])) return true;
    }
  }
  return false;
}

double ray_hit(const Vec2& o, const Vec2& dir, const Vec2& a, const Vec2& b) {
  Vec2 e = b - a;
  double denom = dir.x * e.y - dir.y * e.x;
  Vec2 w = a - o;
  if (std::abs(denom) < 1e-15) {
    if (std::abs(w.x * dir.y - w.y * dir.x) > 1e-12) return -1.0;
    double t1 = (a.x - o.x) * dir.x + (a.y - o.y) * dir.y;
    double t2 = (b.x - o.x) * dir.x + (b.y - o.y) * dir.y;
    double t = std::numeric_limits<double>::max();
    if (t1 >= 0) t = std::min(t, t1);
    if (t2 >= 0) t = std::min(t, t2);
    return t == std::numeric_limits<double>::max() ? -1.0 : t;
  }
  double t = (w.x * e.y - w.y * e.x) / denom;
  double u = (w.x * dir.y - w.y * dir.x) / denom;
  if (t < 0 || u < -1e-12 || u > 1 + 1e-12) return -1.0;
  return t;
}

double penalty(double over, double rate) { return over <= 0 ? 1.0 : std::exp(-rate * over); }

struct GazeTri {
  bool valid = false;
  Vec2 px[3];   // image-space triangle
  Vec2 map[3];  // floor projection of the same vertices
};

struct World {
  const ScenarioScript* script;
  const GroundTruth* truth;
  Mat3 h;      // pixel -> map
  Mat3 h_inv;  // map -> pixel
  std::int64_t frames;
  double fps;

  std::vector<int> member_idx;  // indices into truth->agents, entry order
  std::vector<int> enemy_idx;
  std::vector<std::int64_t> entry_frame;  // per agent, -1 when none
  std::vector<std::vector<GazeTri>> gaze; // [agent][frame - first_frame]
};

bool agent_present(const World& w, int a, std::int64_t f) {
  return f >= w.truth->agents[a].first_frame && f < w.frames;
}

Vec2 agent_pos(const World& w, int a, std::int64_t f) {
  const AgentTruth& at = w.truth->agents[a];
  return at.positions[std::size_t(f - at.first_frame)];
}

const Detection& agent_det(const World& w, int a, std::int64_t f) {
  const AgentTruth& at = w.truth->agents[a];
  return at.detections[std::size_t(f - at.first_frame)];
}

// Entry events per the engine's definition: first sustained interior stretch
// after visiting the entry zone, on true positions.
void compute_entries(World& w) {
  const RoomConfig& room = w.script->room;
  int hyst = std::max(1, int(std::ceil(room.mapping_params.entry_hysteresis * w.fps)));
  w.entry_frame.assign(w.truth->agents.size(), -1);

  for (std::size_t a = 0; a < w.truth->agents.size(); ++a) {
    const AgentTruth& at = w.truth->agents[a];
    std::int64_t zone_at = -1;
    std::int64_t interior_first = -1;
    for (std::size_t i = 0; i < at.positions.size(); ++i) {
      bool zone = in_poly(at.positions[i], room.entry_zone);
      bool interior = in_poly(at.positions[i], room.room_polygon) && !zone;
      if (zone && zone_at < 0) zone_at = std::int64_t(i);
      if (interior && interior_first < 0) interior_first = std::int64_t(i);
    }
    if (zone_at < 0 || (interior_first >= 0 && interior_first < zone_at)) continue;
    for (std::size_t i = std::size_t(zone_at) + 1; i < at.positions.size(); ++i) {
      bool zone = in_poly(at.positions[i], room.entry_zone);
      bool interior = in_poly(at.positions[i], room.room_polygon) && !zone;
      if (!interior) continue;
      bool sustained = true;
      for (std::size_t j = i; j < std::min(i + std::size_t(hyst), at.positions.size()); ++j) {
        if (in_poly(at.positions[j], room.entry_zone)) {
          sustained = false;
          break;
        }
      }
      if (sustained) {
        w.entry_frame[a] = at.first_frame + std::int64_t(i);
        break;
      }
    }
  }
}

// Gaze triangle per agent and frame, rebuilt from the rendered head keypoints
// with local projective math.
void compute_gaze(World& w) {
  const RoomConfig& room = w.script->room;
  double half_angle = room.mapping_params.gaze_half_angle_deg * M_PI / 180.0;
  std::vector<Segment> walls = room.all_walls();

  w.gaze.resize(w.truth->agents.size());
  for (std::size_t a = 0; a < w.truth->agents.size(); ++a) {
    const AgentTruth& at = w.truth->agents[a];
    w.gaze[a].resize(at.detections.size());
    for (std::size_t i = 0; i < at.detections.size(); ++i) {
      const Detection& det = at.detections[i];
      double conf = room.metric_params.keypoint_conf;
      auto valid = [&](int idx) {
        const Keypoint& k = det.keypoints[idx];
        return std::isfinite(k.x) && std::isfinite(k.y) && k.confidence >= conf;
      };
      Vec2 origin;
      if (valid(kp::kLEye) && valid(kp::kREye)) {
        origin = (det.keypoints[kp::kLEye].point() + det.keypoints[kp::kREye].point()) * 0.5;
      } else if (valid(kp::kLEye)) {
        origin = det.keypoints[kp::kLEye].point();
      } else if (valid(kp::kREye)) {
        origin = det.keypoints[kp::kREye].point();
      } else if (valid(kp::kNose)) {
        origin = det.keypoints[kp::kNose].point();
      } else {
        continue;
      }
      Vec2 ear;
      if (valid(kp::kLEar) && valid(kp::kREar)) {
        ear = (det.keypoints[kp::kLEar].point() + det.keypoints[kp::kREar].point()) * 0.5;
      } else if (valid(kp::kLEar)) {
        ear = det.keypoints[kp::kLEar].point();
      } else if (valid(kp::kREar)) {
        ear = det.keypoints[kp::kREar].point();
      } else {
        continue;
      }
      Vec2 d = origin - ear;
      double n = d.norm();
      if (n < 1e-6) continue;
      d = d / n;

      Vec2 origin_map = w.h.apply(origin);
      if (!in_poly(origin_map, room.room_polygon)) continue;
      Vec2 ahead_map = w.h.apply(origin + d);
      Vec2 dm = ahead_map - origin_map;
      double dmn = dm.norm();
      if (dmn < 1e-12) continue;
      dm = dm / dmn;
      double best = std::numeric_limits<double>::max();
      for (const Segment& wall : walls) {
        double t = ray_hit(origin_map, dm, wall.a, wall.b);
        if (t > 1e-9 && t < best) best = t;
      }
      if (best == std::numeric_limits<double>::max() || best < 1e-9) continue;
      Vec2 end_px = w.h_inv.apply(Vec2{origin_map.x + dm.x * best, origin_map.y + dm.y * best});
      double len_px = (end_px - origin).norm();
      if (len_px < 1e-9) continue;

      GazeTri tri;
      tri.valid = true;
      tri.px[0] = origin;
      double cs = std::cos(half_angle), sn = std::sin(half_angle);
      Vec2 arm1{cs * d.x - sn * d.y, sn * d.x + cs * d.y};
      Vec2 arm2{cs * d.x + sn * d.y, -sn * d.x + cs * d.y};
      tri.px[1] = origin + arm1 * len_px;
      tri.px[2] = origin + arm2 * len_px;
      for (int v = 0; v < 3; ++v) tri.map[v] = w.h.apply(tri.px[v]);
      w.gaze[a][i] = tri;
    }
  }
}

World build_world(const ScenarioScript& script, const GroundTruth& truth) {
  World w;
  w.script = &script;
  w.truth = &truth;
  Homography h = estimate_homography(script.room.calibration_pairs);
  w.h = from_homography(h);
  w.h_inv = w.h.inverse();
  w.frames = truth.frame_count;
  w.fps = truth.fps;
  compute_entries(w);
  compute_gaze(w);

  std::vector<std::pair<std::int64_t, int>> entries;
  for (std::size_t a = 0; a < truth.agents.size(); ++a) {
    if (truth.agents[a].role == RoleKind::Enemy) {
      bool ever_zone = false;
      for (const Vec2& p : truth.agents[a].positions) {
        if (in_poly(p, script.room.entry_zone)) ever_zone = true;
      }
      if (!ever_zone) w.enemy_idx.push_back(int(a));
      continue;
    }
    if (w.entry_frame[a] >= 0) entries.emplace_back(w.entry_frame[a], int(a));
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& [f, a] : entries) w.member_idx.push_back(a);
  return w;
}

const GazeTri* gaze_at(const World& w, int a, std::int64_t f) {
  if (!agent_present(w, a, f)) return nullptr;
  const GazeTri& g = w.gaze[a][std::size_t(f - w.truth->agents[a].first_frame)];
  return g.valid ? &g : nullptr;
}

std::optional<int> entry_side(const World& w, int a) {
  // +1 left, -1 right, matching cross(door normal, movement).
  std::int64_t ef = w.entry_frame[a];
  if (ef < 0) return std::nullopt;
  std::int64_t window = std::int64_t(std::llround(0.5 * w.fps));
  std::int64_t end = std::min(ef + window, w.frames - 1);
  if (end <= ef) return std::nullopt;
  Vec2 move = agent_pos(w, a, end) - agent_pos(w, a, ef);
  if (move.norm() < 1e-12) return std::nullopt;

  Polygon room = w.script->room.room_polygon;
  Polygon zone = w.script->room.entry_zone;
  auto centroid = [](const Polygon& poly) {
    double acc = 0.0;
    Vec2 c{};
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = poly[i];
      const Vec2& q = poly[(i + 1) % n];
      double wgt = p.x * q.y - q.x * p.y;
      acc += wgt;
      c.x += (p.x + q.x) * wgt;
      c.y += (p.y + q.y) * wgt;
    }
    if (std::abs(acc) < 1e-15) return c;
    return Vec2{c.x / (3 * acc), c.y / (3 * acc)};
  };
  Vec2 normal = centroid(room) - centroid(zone);
  double nn = normal.norm();
  if (nn < 1e-12) return std::nullopt;
  normal = normal / nn;
  double crossv = normal.x * move.y - normal.y * move.x;
  return crossv > 0 ? 1 : -1;
}

struct PodInfo {
  int agent = -1;
  std::string pod;
  std::int64_t first_arrival = -1;
  double capture_time = -1.0;  // < 0 when never captured
};

std::vector<PodInfo> pod_analysis(const World& w) {
  std::vector<PodInfo> out;
  if (w.member_idx.empty()) return out;
  auto side = entry_side(w, w.member_idx.front());
  if (!side) return out;
  const char* dir = *side > 0 ? "left" : "right";
  auto it = w.script->room.metric_params.pod_assignment_table.find(dir);
  if (it == w.script->room.metric_params.pod_assignment_table.end()) {
    throw Error(ErrorCode::MissingAssignment, "oracle: pod table lacks direction");
  }
  int hold = std::max(1, int(std::ceil(w.script->room.metric_params.pod_hold_min * w.fps)));

  for (std::size_t i = 0; i < w.member_idx.size() && i < it->second.size(); ++i) {
    PodInfo info;
    info.agent = w.member_idx[i];
    info.pod = it->second[i];
    auto pod_it = w.script->room.pod_regions.find(info.pod);
    if (pod_it == w.script->room.pod_regions.end()) {
      throw Error(ErrorCode::MissingAssignment, "oracle: pod region missing");
    }
    int run = 0;
    for (std::int64_t f = w.entry_frame[info.agent]; f < w.frames; ++f) {
      if (!agent_present(w, info.agent, f)) break;
      bool inside = in_poly(agent_pos(w, info.agent, f), pod_it->second);
      if (inside) {
        if (info.first_arrival < 0) info.first_arrival = f;
        ++run;
        if (run >= hold && info.capture_time < 0) {
          info.capture_time = double(f - run + 1) / w.fps;
        }
      } else {
        run = 0;
      }
    }
    out.push_back(std::move(info));
  }
  return out;
}

std::vector<std::optional<double>> clearance_times(const World& w) {
  const MetricParams& p = w.script->room.metric_params;
  int need = std::max(1, int(std::ceil(p.threat_overlap_min * w.fps)));
  std::vector<std::optional<double>> cleared(w.truth->agents.size());

  auto overlap = [](const Box& a, const Box& b) {
    double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return iw > 0 && ih > 0;
  };

  for (int e : w.enemy_idx) {
    std::optional<double> best;
    for (int m : w.member_idx) {
      std::int64_t run_start = -1, w_first = -1, g_first = -1;
      for (std::int64_t f = 0; f <= w.frames; ++f) {
        bool both = f < w.frames && agent_present(w, e, f) && agent_present(w, m, f);
        bool over = both && overlap(agent_det(w, m, f).bbox, agent_det(w, e, f).bbox);
        if (over) {
          if (run_start < 0) {
            run_start = f;
            w_first = g_first = -1;
          }
          if (w_first < 0) {
            const Detection& md = agent_det(w, m, f);
            const Box& eb = agent_det(w, e, f).bbox;
            for (int widx : {kp::kLWrist, kp::kRWrist}) {
              const Keypoint& k = md.keypoints[widx];
              if (k.confidence >= p.keypoint_conf && k.x >= eb.x1 && k.x <= eb.x2 &&
                  k.y >= eb.y1 && k.y <= eb.y2) {
                w_first = f;
                break;
              }
            }
          }
          if (g_first < 0) {
            const GazeTri* g = gaze_at(w, m, f);
            if (g && tri_box(g->px[0], g->px[1], g->px[2], agent_det(w, e, f).bbox)) {
              g_first = f;
            }
          }
        } else if (run_start >= 0) {
          std::int64_t len = f - run_start;
          if (len >= need && w_first >= 0 && (!p.gaze_required || g_first >= 0)) {
            double t = double(run_start + need - 1) / w.fps;
            t = std::max(t, double(w_first) / w.fps);
            if (p.gaze_required) t = std::max(t, double(g_first) / w.fps);
            if (!best || t < *best) best = t;
          }
          run_start = -1;
        }
      }
    }
    cleared[e] = best;
  }
  return cleared;
}

bool member_in_room(const World& w, int a, std::int64_t f) {
  return agent_present(w, a, f) && in_poly(agent_pos(w, a, f), w.script->room.room_polygon);
}

}  // namespace oracle

std::optional<double> oracle_metric(const std::string& name, const ScenarioScript& script,
                                    const GroundTruth& truth) {
  oracle::World w = oracle::build_world(script, truth);
  const MetricParams& p = script.room.metric_params;

  if (name == "entrance_vectors") {
    if (w.member_idx.size() < 2) return std::nullopt;
    std::vector<std::optional<int>> sides;
    for (int a : w.member_idx) sides.push_back(oracle::entry_side(w, a));
    int pairs = 0, alt = 0;
    for (std::size_t i = 0; i + 1 < sides.size(); ++i) {
      if (!sides[i] || !sides[i + 1]) continue;
      ++pairs;
      if (*sides[i] != *sides[i + 1]) ++alt;
    }
    if (pairs == 0) return std::nullopt;
    return double(alt) / double(pairs);
  }

  if (name == "entrance_hesitation") {
    if (w.member_idx.size() < 2) return std::nullopt;
    double sum = 0;
    int count = 0;
    for (std::size_t i = 0; i + 1 < w.member_idx.size(); ++i) {
      double gap = double(w.entry_frame[w.member_idx[i + 1]] - w.entry_frame[w.member_idx[i]]) /
                   w.fps;
      double threshold = (i == 1) ? p.entry_gap_second_third : p.entry_gap_general;
      sum += oracle::penalty(gap - threshold, p.penalty_rate);
      ++count;
    }
    return sum / count;
  }

  if (name == "identify_capture_pod") {
    auto pods = oracle::pod_analysis(w);
    if (pods.empty()) return std::nullopt;
    int captured = 0;
    for (const auto& info : pods) {
      if (info.capture_time >= 0) ++captured;
    }
    return double(captured) / double(pods.size());
  }

  if (name == "pod_capture_time") {
    auto pods = oracle::pod_analysis(w);
    if (pods.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& info : pods) {
      if (info.capture_time < 0) continue;
      double entry_t = double(w.entry_frame[info.agent]) / w.fps;
      sum += oracle::penalty(info.capture_time - entry_t - p.pod_time_limit, p.penalty_rate);
    }
    return sum / double(pods.size());
  }

  if (name == "move_along_wall") {
    if (w.member_idx.empty()) return std::nullopt;
    std::vector<oracle::PodInfo> pods;
    try {
      pods = oracle::pod_analysis(w);
    } catch (const Error&) {
    }
    std::vector<Segment> walls = script.room.all_walls();
    double sum = 0;
    int counted = 0;
    for (int a : w.member_idx) {
      std::int64_t stop = w.frames;
      for (const auto& info : pods) {
        if (info.agent == a && info.first_arrival >= 0) stop = info.first_arrival;
      }
      int inside = 0, total = 0;
      for (std::int64_t f = w.entry_frame[a]; f < stop; ++f) {
        if (!oracle::agent_present(w, a, f)) break;
        ++total;
        Vec2 pos = oracle::agent_pos(w, a, f);
        double best = std::numeric_limits<double>::max();
        for (const Segment& wall : walls) {
          best = std::min(best, oracle::seg_dist(pos, wall.a, wall.b));
        }
        if (best <= p.wall_buffer) ++inside;
      }
      if (total == 0) continue;
      sum += double(inside) / double(total);
      ++counted;
    }
    if (counted == 0) return std::nullopt;
    return sum / counted;
  }

  if (name == "threat_clearance") {
    if (w.enemy_idx.empty()) return std::nullopt;
    auto cleared = oracle::clearance_times(w);
    int done = 0;
    for (int e : w.enemy_idx) {
      if (cleared[e]) ++done;
    }
    return double(done) / double(w.enemy_idx.size());
  }

  if (name == "threat_coverage") {
    if (w.enemy_idx.empty()) return std::nullopt;
    auto cleared = oracle::clearance_times(w);
    int qualifying = 0, watched = 0;
    for (std::int64_t f = 0; f < w.frames; ++f) {
      bool member_present = false;
      for (int m : w.member_idx) {
        if (oracle::member_in_room(w, m, f)) member_present = true;
      }
      if (!member_present) continue;
      for (int e : w.enemy_idx) {
        if (!oracle::agent_present(w, e, f)) continue;
        if (cleared[e] && double(f) / w.fps >= *cleared[e]) continue;
        ++qualifying;
        for (int m : w.member_idx) {
          const oracle::GazeTri* g = oracle::gaze_at(w, m, f);
          if (g && oracle::tri_box(g->px[0], g->px[1], g->px[2],
                                   oracle::agent_det(w, e, f).bbox)) {
            ++watched;
            break;
          }
        }
      }
    }
    if (qualifying == 0) return std::nullopt;
    return double(watched) / double(qualifying);
  }

  if (name == "teammate_coverage") {
    if (w.member_idx.size() < 2) return std::nullopt;
    int team_frames = 0, unseen = 0;
    for (int m : w.member_idx) {
      for (std::int64_t f = 0; f < w.frames; ++f) {
        if (!oracle::member_in_room(w, m, f)) continue;
        ++team_frames;
        bool teammate = false, seen = false;
        const Box& my_box = oracle::agent_det(w, m, f).bbox;
        for (int other : w.member_idx) {
          if (other == m || !oracle::member_in_room(w, other, f)) continue;
          teammate = true;
          const oracle::GazeTri* g = oracle::gaze_at(w, other, f);
          if (g && oracle::tri_box(g->px[0], g->px[1], g->px[2], my_box)) {
            seen = true;
            break;
          }
        }
        if (teammate && !seen) ++unseen;
      }
    }
    if (team_frames == 0) return std::nullopt;
    return 1.0 - double(unseen) / double(team_frames);
  }

  if (name == "floor_coverage" || name == "total_floor_coverage_time") {
    if (w.member_idx.empty()) return std::nullopt;
    // Same grid derivation as the engine, rebuilt locally.
    Box bounds{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
               std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Vec2& v : script.room.room_polygon) {
      bounds.x1 = std::min(bounds.x1, v.x);
      bounds.y1 = std::min(bounds.y1, v.y);
      bounds.x2 = std::max(bounds.x2, v.x);
      bounds.y2 = std::max(bounds.y2, v.y);
    }
    double cell = p.floor_grid_cell;
    int nx = std::max(1, int(std::ceil((bounds.x2 - bounds.x1) / cell)));
    int ny = std::max(1, int(std::ceil((bounds.y2 - bounds.y1) / cell)));
    std::vector<char> interior(std::size_t(nx) * ny, 0), covered(std::size_t(nx) * ny, 0);
    int interior_count = 0, covered_count = 0;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        Vec2 center{bounds.x1 + (ix + 0.5) * cell, bounds.y1 + (iy + 0.5) * cell};
        if (oracle::in_poly(center, script.room.room_polygon)) {
          interior[std::size_t(iy) * nx + ix] = 1;
          ++interior_count;
        }
      }
    }
    if (interior_count == 0) return std::nullopt;
    std::optional<double> full_time;
    for (std::int64_t f = 0; f < w.frames; ++f) {
      for (int m : w.member_idx) {
        const oracle::GazeTri* g = oracle::gaze_at(w, m, f);
        if (!g) continue;
        for (int iy = 0; iy < ny; ++iy) {
          for (int ix = 0; ix < nx; ++ix) {
            std::size_t idx = std::size_t(iy) * nx + ix;
            if (!interior[idx] || covered[idx]) continue;
            Vec2 center{bounds.x1 + (ix + 0.5) * cell, bounds.y1 + (iy + 0.5) * cell};
            if (oracle::in_tri(center, g->map[0], g->map[1], g->map[2])) {
              covered[idx] = 1;
              ++covered_count;
            }
          }
        }
      }
      if (!full_time && covered_count == interior_count) full_time = double(f) / w.fps;
    }
    if (name == "floor_coverage") return double(covered_count) / double(interior_count);
    if (!full_time) return 0.0;
    return oracle::penalty(*full_time - p.floor_time_limit, p.penalty_rate);
  }

  throw Error(ErrorCode::BadConfig, "oracle: unknown metric '" + name + "'");
}

ScoreSheet oracle_rollup(const CtaHierarchy& h, const std::vector<LeafValues>& per_trial_leaves) {
  ScoreSheet sheet;
  std::vector<const HierarchyNode*> ordered;
  for (const HierarchyNode& n : h.nodes) ordered.push_back(&n);
  std::sort(ordered.begin(), ordered.end(), [](const HierarchyNode* a, const HierarchyNode* b) {
    return a->level != b->level ? a->level < b->level : a->name < b->name;
  });
  for (const HierarchyNode* n : ordered) sheet.node_order.push_back(n->id);

  std::map<std::string, double> prev;
  for (int trial = 1; trial <= int(per_trial_leaves.size()); ++trial) {
    const LeafValues& leaves = per_trial_leaves[trial - 1];

    std::function<std::optional<double>(const HierarchyNode&)> value =
        [&](const HierarchyNode& n) -> std::optional<double> {
      if (!n.metric.empty()) {
        auto it = leaves.find(n.metric);
        return it == leaves.end() ? std::nullopt : it->second;
      }
      double num = 0, den = 0;
      for (const HierarchyChild& c : n.children) {
        auto child = value(*h.find(c.id));
        if (!child) continue;
        num += c.weight * *child;
        den += c.weight;
      }
      if (den <= 0) return std::nullopt;
      return num / den;
    };

    double lambda = std::log(2.0) / h.smoothing.half_life;
    double alpha = h.smoothing.alpha_ceil * (1.0 - std::exp(-lambda * (trial - 1)));

    std::map<std::string, NodeScore> scores;
    for (const HierarchyNode& n : h.nodes) {
      NodeScore ns;
      ns.raw = value(n);
      bool smooth_this = h.smooth_leaves || n.metric.empty();
      auto it = prev.find(n.id);
      if (ns.raw && it != prev.end() && smooth_this) {
        ns.smoothed = alpha * it->second + (1.0 - alpha) * *ns.raw;
      } else if (ns.raw) {
        ns.smoothed = *ns.raw;
      } else if (it != prev.end()) {
        ns.smoothed = it->second;
      }
      if (ns.smoothed) prev[n.id] = *ns.smoothed;
      const BandThresholds& b = n.bands ? *n.bands : h.bands;
      if (!ns.smoothed) {
        ns.band = ScoreBand::NotApplicable;
      } else if (*ns.smoothed >= b.above_min) {
        ns.band = ScoreBand::Above;
      } else if (*ns.smoothed >= b.at_min) {
        ns.band = ScoreBand::At;
      } else {
        ns.band = ScoreBand::Below;
      }
      scores[n.id] = ns;
    }
    sheet.trials.push_back(std::move(scores));
  }
  return sheet;
}

// ---------------------------------------------------------------------------
// Seeded scenario generator.
// ---------------------------------------------------------------------------
ScenarioScript random_scenario(std::uint64_t seed, const RoomConfig& base) {
  Rng rng(seed * 2654435761ull + 17);
  ScenarioScript script;
  script.room = base;
  script.fps = 30.0;
  script.seed = seed;
  script.noise.keypoint_sigma_px = 0.7;
  script.noise.dropout_prob = 0.03;
  script.noise.foot_dropout_prob = 0.05;
  script.noise.head_dropout_prob = 0.005;
  // Random runs finish their room scans late; keep the scan-time threshold
  // out of the penalty knee so scores stay well conditioned under noise.
  script.room.metric_params.floor_time_limit = 60.0;

  Box bounds = polygon_bounds(base.room_polygon);
  double door_x = polygon_centroid(base.entry_zone).x;
  double room_mid_x = (bounds.x1 + bounds.x2) * 0.5;
  double room_mid_y = (bounds.y1 + bounds.y2) * 0.5;
  double corridor_y = bounds.y1 + 0.35;

  int n_members = 2 + int(rng.next() % 3);
  int sweeper = n_members - 1;
  // Stare-type runs keep every gaze short (walls only); sweeper-type runs end
  // with settle sweeps at each pod plus a tour that saturates the floor.
  bool stare_type = rng.uniform() < 0.3;
  int n_enemies = stare_type ? int(rng.next() % 3) : int(rng.next() % 2);

  // Static enemies along the north wall, clear of pods and member lanes.
  for (int e = 0; e < n_enemies; ++e) {
    AgentScript enemy;
    enemy.name = "e" + std::to_string(e + 1);
    enemy.role = RoleKind::Enemy;
    double x = 2.9 + rng.uniform() * 2.2;
    double y = bounds.y2 - 0.55;
    enemy.waypoints.push_back({0.0, {x, y}});
    enemy.waypoints.push_back({1.0, {x, y}});
    enemy.gaze.push_back({0.0, 270.0});
    script.agents.push_back(std::move(enemy));
  }
  // In sweeper-type runs the single enemy is claimed by one dedicated member.
  int claimer = -1;
  if (!stare_type && n_enemies > 0) {
    claimer = n_members >= 3 ? 1 + int(rng.next() % std::uint64_t(n_members - 2)) : 0;
  }

  std::vector<std::string> pods;
  for (const auto& [name, poly] : base.pod_regions) pods.push_back(name);
  // Seeded shuffle.
  for (std::size_t i = pods.size(); i > 1; --i) {
    std::swap(pods[i - 1], pods[rng.next() % i]);
  }
  std::vector<Vec2> member_pod(std::size_t(n_members), Vec2{room_mid_x, corridor_y});
  for (int m = 0; m < n_members; ++m) {
    if (!pods.empty()) {
      member_pod[m] = polygon_centroid(base.pod_regions.at(pods[std::size_t(m) % pods.size()]));
    }
  }
  std::vector<std::string> unassigned;
  for (std::size_t p = std::size_t(n_members); p < pods.size(); ++p) unassigned.push_back(pods[p]);

  double t_enter = 0.3 + rng.uniform() * 0.4;
  double max_t = 0.0;
  for (int m = 0; m < n_members; ++m) {
    AgentScript member;
    member.name = "m" + std::to_string(m + 1);
    member.role = RoleKind::TeamMember;
    double speed = 1.2 + rng.uniform() * 0.8;
    double margin = 0.30 + rng.uniform() * 0.10;

    Vec2 pod_center = member_pod[std::size_t(m)];
    // Wall side follows the assigned pod so transits stay out of pod regions.
    bool left = pod_center.x < room_mid_x;
    double wall_x = left ? bounds.x1 + margin : bounds.x2 - margin;

    auto push = [&](double t, Vec2 pos) {
      if (!member.waypoints.empty() && t <= member.waypoints.back().t + 1e-9) return;
      member.waypoints.push_back({t, pos});
    };
    // Raw keys for scripted rotations; unwrapped keys for bearing tracking,
    // which must stay on one branch of the circle for clean interpolation.
    auto push_gaze_raw = [&](double t, double heading) {
      if (!member.gaze.empty() && t <= member.gaze.back().t + 1e-9) return;
      member.gaze.push_back({t, heading});
    };
    auto push_gaze = [&](double t, double heading) {
      if (!member.gaze.empty()) {
        if (t <= member.gaze.back().t + 1e-9) return;
        while (heading - member.gaze.back().heading_deg > 180.0) heading -= 360.0;
        while (heading - member.gaze.back().heading_deg < -180.0) heading += 360.0;
      }
      member.gaze.push_back({t, heading});
    };

    double t = t_enter;
    Vec2 start{door_x - 0.2 + 0.4 * rng.uniform(), -0.35};
    push(t, start);
    t += 0.45;  // settle in the zone so the track confirms
    push(t, start);
    Vec2 inside{start.x, corridor_y};
    t += (inside - start).norm() / speed;
    push(t, inside);

    Vec2 corner{wall_x, corridor_y};
    t += (corner - inside).norm() / speed;
    push(t, corner);

    double dwell_end = -1.0;
    if (m == claimer) {
      Vec2 epos = script.agents[0].waypoints.front().pos;
      Vec2 under{epos.x, corridor_y};
      t += (under - corner).norm() / speed;
      push(t, under);
      Vec2 approach{epos.x, epos.y - 0.5};
      t += (approach - under).norm() / speed;
      push(t, approach);
      double dwell = 2.5 + rng.uniform();
      t += dwell;
      push(t, approach);
      dwell_end = t;
      // Return through a member-specific mid-room band so routes never share
      // a point with a dwelling or posted teammate.
      double band_y = bounds.y1 + 2.9 + 0.3 * m;
      Vec2 down{epos.x, band_y};
      t += (down - approach).norm() / speed;
      push(t, down);
      Vec2 lateral{pod_center.x, band_y};
      t += (lateral - down).norm() / speed;
      push(t, lateral);
      t += (pod_center - lateral).norm() / speed;
      push(t, pod_center);
    } else {
      Vec2 climb{wall_x, pod_center.y};
      t += (climb - corner).norm() / speed;
      push(t, climb);
      t += (pod_center - climb).norm() / speed;
      push(t, pod_center);
    }
    double arrival_t = t;

    if (stare_type) {
      // Short gazes only: always face the nearest wall, then the near corner.
      auto wall_heading = [&](const Vec2& pos) {
        double best = pos.y - bounds.y1;   // south
        double heading = 270.0;
        if (pos.x - bounds.x1 < best) { best = pos.x - bounds.x1; heading = 180.0; }
        if (bounds.x2 - pos.x < best) { best = bounds.x2 - pos.x; heading = 0.0; }
        if (bounds.y2 - pos.y < best) { heading = 90.0; }
        return heading;
      };
      for (const Waypoint& wp : member.waypoints) {
        push_gaze(wp.t, wall_heading(wp.pos));
      }
      double corner_heading =
          std::atan2((pod_center.y < room_mid_y ? bounds.y1 : bounds.y2) - pod_center.y,
                     (pod_center.x < room_mid_x ? bounds.x1 : bounds.x2) - pod_center.x) *
          180.0 / M_PI;
      push_gaze(arrival_t + 0.4, corner_heading);
      max_t = std::max(max_t, arrival_t);
      script.agents.push_back(std::move(member));
      t_enter = t_enter + 1.9 + rng.uniform() * 0.5 + 0.8 / speed;
      continue;
    }

    // Threat watching: the claimer tracks its enemy leg by leg; the first
    // entrant locks onto the enemy after a randomized delay.
    bool locks_enemy = n_enemies > 0 && (m == claimer || m == 0);
    if (locks_enemy) {
      Vec2 epos = script.agents[0].waypoints.front().pos;
      double lock_from = t_enter;
      if (m == 0 && m != claimer) {
        lock_from = t_enter + rng.uniform() * 3.0;  // varied pre-watch delay
        push_gaze(0.0, 270.0);
        push_gaze(lock_from, 270.0);
      }
      double lock_until = dwell_end > 0 ? dwell_end : arrival_t;
      // Bearings drift nonlinearly along a leg; sample densely so the lock
      // keeps the enemy well inside the wedge the whole way.
      for (double ts = lock_from; ts < lock_until; ts += 0.4) {
        Vec2 pos = interp_position(member.waypoints, ts);
        push_gaze(ts, std::atan2(epos.y - pos.y, epos.x - pos.x) * 180.0 / M_PI);
      }
      {
        Vec2 pos = interp_position(member.waypoints, lock_until);
        push_gaze(lock_until, std::atan2(epos.y - pos.y, epos.x - pos.x) * 180.0 / M_PI);
      }
    }
    // Everyone scans the room once posted, then holds on a ring target so the
    // whole team stays covered for the rest of the run.
    double sweep_start = arrival_t + 0.4;
    double h0 = rng.uniform() * 360.0;
    push_gaze_raw(sweep_start, h0);
    push_gaze_raw(sweep_start + 4.0, h0 + 360.0);
    double posted_t = sweep_start + 4.0;

    if (m == sweeper) {
      // Second sweep from an offset spot covers the cells this one shadows,
      // then a tour of the unassigned pods saturates the rest of the floor.
      Vec2 offset{pod_center.x < room_mid_x ? 0.7 : -0.7,
                  pod_center.y < room_mid_y ? 0.7 : -0.7};
      Vec2 spot = pod_center + offset;
      push(posted_t + 0.2, pod_center);
      push(posted_t + 0.8, spot);
      push_gaze_raw(posted_t + 1.0, h0);
      push_gaze_raw(posted_t + 5.0, h0 + 360.0);
      double tt = posted_t + 5.0;
      Vec2 at = spot;
      for (const std::string& pod_name : unassigned) {
        Vec2 target = polygon_centroid(base.pod_regions.at(pod_name));
        double walk = (target - at).norm() / speed;
        push(tt + 0.2, at);
        push(tt + 0.2 + walk, target);
        tt += 0.2 + walk;
        push_gaze_raw(tt + 0.2, h0);
        push_gaze_raw(tt + 4.2, h0 + 360.0);
        tt += 4.2;
        at = target;
      }
      double back = (pod_center - at).norm() / speed;
      push(tt + 0.2, at);
      push(tt + 0.2 + back, pod_center);
      posted_t = tt + 0.2 + back;
    }

    Vec2 ring_target = member_pod[std::size_t((m + 1) % n_members)];
    double ring_bearing =
        std::atan2(ring_target.y - pod_center.y, ring_target.x - pod_center.x) * 180.0 / M_PI;
    push_gaze_raw(posted_t + 0.4, ring_bearing);

    max_t = std::max(max_t, posted_t + 0.4);
    script.agents.push_back(std::move(member));
    // Strictly sequential entries: the next member shows up well after the
    // previous one has left the zone.
    t_enter = t_enter + 1.9 + rng.uniform() * 0.5 + 0.8 / speed;
  }

  // Leave a settled stretch at the end where the ring watch holds.
  script.duration_s = std::max(max_t + (stare_type ? 2.0 : 8.0), 12.0);
  return script;
}

}  // namespace ecr
