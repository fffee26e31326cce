#include "ecr/pipeline.hpp"

#include "ecr/errors.hpp"
#include "ecr/version.hpp"

namespace ecr {

using nlohmann::json;

Homography calibrate(const RoomConfig& config) {
  Homography h = estimate_homography(config.calibration_pairs);
  double err = max_reprojection_error(h, config.calibration_pairs);
  if (err > config.mapping_params.calibration_tolerance) {
    throw Error(ErrorCode::CalibrationToleranceExceeded,
                "max reprojection error " + std::to_string(err) + " m exceeds tolerance " +
                    std::to_string(config.mapping_params.calibration_tolerance) + " m");
  }
  return h;
}

AnalysisResult analyze_sequence(const FrameSequence& frames, const RoomConfig& config,
                                const TrackerParams& tracker_params) {
  AnalysisResult result;
  result.homography = calibrate(config);
  result.tracks = run_tracker(frames, tracker_params);
  result.trajectories = build_trajectories(result.tracks, result.homography, config, frames.fps);
  result.roles = classify_roles(result.trajectories, config, frames.fps);
  result.gaze = build_gaze_records(result.tracks, result.homography, config);
  MetricContext ctx(result.trajectories, result.roles, result.tracks, result.gaze, config,
                    frames.fps);
  result.metrics = compute_all_metrics(ctx);
  return result;
}

json roles_to_json(const std::vector<AgentRole>& roles) {
  json arr = json::array();
  for (const AgentRole& r : roles) {
    json j;
    j["track"] = r.track_id;
    j["role"] = role_kind_name(r.kind);
    if (r.kind == RoleKind::TeamMember) {
      j["entry_order"] = r.entry_order;
      j["entry_time"] = r.entry_time;
      j["entry_frame"] = r.entry_frame;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

json metrics_to_json(const std::vector<MetricResult>& metrics) {
  json arr = json::array();
  for (const MetricResult& m : metrics) {
    json j;
    j["metric"] = m.metric_name;
    if (m.score) {
      j["score"] = *m.score;
    } else {
      j["score"] = nullptr;
    }
    json agents = json::object();
    for (const auto& [id, v] : m.per_agent) agents[std::to_string(id)] = v;
    j["per_agent"] = agents;
    json ev = json::array();
    for (const MetricEvidence& e : m.evidence) {
      ev.push_back({{"from", e.frame_begin}, {"to", e.frame_end}, {"note", e.description}});
    }
    j["evidence"] = ev;
    arr.push_back(std::move(j));
  }
  return arr;
}

json analysis_to_json(const AnalysisResult& result, const RoomConfig& config, double fps) {
  json doc;
  doc["engine_version"] = kEngineVersion;
  doc["fps"] = fps;
  doc["params"]["metric_params"] = metric_params_to_json(config.metric_params);
  doc["params"]["mapping_params"] = mapping_params_to_json(config.mapping_params);
  doc["roles"] = roles_to_json(result.roles);
  doc["metrics"] = metrics_to_json(result.metrics);
  return doc;
}

LeafValues leaf_values_from_json(const json& doc) {
  if (!doc.contains("metrics") || !doc.at("metrics").is_array()) {
    throw Error(ErrorCode::BadConfig, "metrics document lacks a metrics array");
  }
  LeafValues values;
  for (const json& m : doc.at("metrics")) {
    std::string name = m.at("metric").get<std::string>();
    if (m.contains("score") && !m.at("score").is_null()) {
      values[name] = m.at("score").get<double>();
    } else {
      values[name] = std::nullopt;
    }
  }
  return values;
}

json score_sheet_to_json(const ScoreSheet& sheet, const CtaHierarchy& hierarchy) {
  json doc;
  doc["engine_version"] = kEngineVersion;
  json nodes = json::array();
  for (const std::string& id : sheet.node_order) {
    const HierarchyNode* n = hierarchy.find(id);
    json j;
    j["id"] = id;
    j["name"] = n ? n->name : id;
    j["level"] = n ? n->level : 0;
    if (n && !n->metric.empty()) j["metric"] = n->metric;
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = nodes;
  json trials = json::array();
  for (std::size_t t = 0; t < sheet.trials.size(); ++t) {
    json trial;
    trial["trial"] = t + 1;
    json scores = json::object();
    for (const auto& [id, ns] : sheet.trials[t]) {
      json s;
      s["raw"] = ns.raw ? json(*ns.raw) : json(nullptr);
      s["smoothed"] = ns.smoothed ? json(*ns.smoothed) : json(nullptr);
      s["band"] = band_name(ns.band);
      scores[id] = std::move(s);
    }
    trial["scores"] = std::move(scores);
    trials.push_back(std::move(trial));
  }
  doc["trials"] = std::move(trials);
  return doc;
}

}  // namespace ecr
