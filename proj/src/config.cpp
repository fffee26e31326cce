#include "ecr/config.hpp"

#include <fstream>

#include "ecr/errors.hpp"

namespace ecr {

using nlohmann::json;

std::vector<Segment> RoomConfig::all_walls() const {
  std::vector<Segment> walls;
  size_t n = room_polygon.size();
  for (size_t i = 0; i < n; ++i) {
    walls.push_back(Segment{room_polygon[i], room_polygon[(i + 1) % n]});
  }
  walls.insert(walls.end(), wall_segments.begin(), wall_segments.end());
  return walls;
}

static Polygon parse_polygon(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.size() < 3) {
    throw Error(ErrorCode::BadConfig, what + " must be an array of >= 3 points");
  }
  Polygon poly;
  for (const json& p : arr) {
    if (!p.is_array() || p.size() != 2) {
      throw Error(ErrorCode::BadConfig, what + " points must be [x,y]");
    }
    poly.push_back(Vec2{p[0].get<double>(), p[1].get<double>()});
    if (!poly.back().finite()) {
      throw Error(ErrorCode::BadConfig, what + " contains non-finite coordinates");
    }
  }
  return poly;
}

static void parse_metric_params(const json& mp, MetricParams& metric, MappingParams& mapping) {
  auto num = [&](const char* key, double& target) {
    if (mp.contains(key)) target = mp.at(key).get<double>();
  };
  num("entry_gap_general", metric.entry_gap_general);
  num("entry_gap_second_third", metric.entry_gap_second_third);
  num("penalty_rate", metric.penalty_rate);
  num("pod_hold_min", metric.pod_hold_min);
  num("pod_time_limit", metric.pod_time_limit);
  num("wall_buffer", metric.wall_buffer);
  num("threat_overlap_min", metric.threat_overlap_min);
  num("floor_grid_cell", metric.floor_grid_cell);
  num("floor_time_limit", metric.floor_time_limit);
  num("keypoint_conf", metric.keypoint_conf);
  if (mp.contains("gaze_required")) metric.gaze_required = mp.at("gaze_required").get<bool>();
  if (mp.contains("pod_assignment_table")) {
    for (const auto& [dir, pods] : mp.at("pod_assignment_table").items()) {
      std::vector<std::string> names;
      for (const json& p : pods) names.push_back(p.get<std::string>());
      metric.pod_assignment_table[dir] = std::move(names);
    }
  }
  num("alpha_min", mapping.alpha_min);
  num("alpha_max", mapping.alpha_max);
  num("alpha_dist_ref", mapping.alpha_dist_ref);
  num("process_noise", mapping.process_noise);
  num("measurement_noise", mapping.measurement_noise);
  num("max_speed", mapping.max_speed);
  num("entry_hysteresis", mapping.entry_hysteresis);
  num("calibration_tolerance", mapping.calibration_tolerance);
  num("gaze_half_angle_deg", mapping.gaze_half_angle_deg);
  if (mp.contains("fallback_lag")) mapping.fallback_lag = mp.at("fallback_lag").get<int>();

  if (metric.wall_buffer <= 0 || metric.floor_grid_cell <= 0) {
    throw Error(ErrorCode::BadConfig, "wall_buffer and floor_grid_cell must be > 0");
  }
  for (double d : {metric.entry_gap_general, metric.entry_gap_second_third, metric.pod_hold_min,
                   metric.pod_time_limit, metric.threat_overlap_min, metric.floor_time_limit}) {
    if (d < 0) throw Error(ErrorCode::BadConfig, "durations must be >= 0");
  }
}

CtaHierarchy parse_hierarchy(const json& doc) {
  CtaHierarchy h;
  if (doc.contains("smoothing")) {
    const json& s = doc.at("smoothing");
    if (s.contains("alpha_ceil")) h.smoothing.alpha_ceil = s.at("alpha_ceil").get<double>();
    if (s.contains("half_life")) h.smoothing.half_life = s.at("half_life").get<double>();
  }
  if (doc.contains("bands")) {
    const json& b = doc.at("bands");
    if (b.contains("above_min")) h.bands.above_min = b.at("above_min").get<double>();
    if (b.contains("at_min")) h.bands.at_min = b.at("at_min").get<double>();
  }
  if (doc.contains("smooth_leaves")) h.smooth_leaves = doc.at("smooth_leaves").get<bool>();
  if (!doc.contains("nodes")) {
    throw Error(ErrorCode::BadConfig, "hierarchy requires a nodes array");
  }
  for (const json& n : doc.at("nodes")) {
    HierarchyNode node;
    node.id = n.at("id").get<std::string>();
    node.name = n.value("name", node.id);
    node.level = n.at("level").get<int>();
    if (n.contains("metric")) node.metric = n.at("metric").get<std::string>();
    if (n.contains("children")) {
      for (const json& c : n.at("children")) {
        HierarchyChild child;
        child.id = c.at("id").get<std::string>();
        child.weight = c.value("weight", 1.0);
        node.children.push_back(std::move(child));
      }
    }
    if (n.contains("bands")) {
      BandThresholds bt = h.bands;
      if (n.at("bands").contains("above_min")) bt.above_min = n.at("bands").at("above_min").get<double>();
      if (n.at("bands").contains("at_min")) bt.at_min = n.at("bands").at("at_min").get<double>();
      node.bands = bt;
    }
    h.nodes.push_back(std::move(node));
  }
  return h;
}

RoomConfig load_room_config(const json& doc) {
  RoomConfig cfg;
  if (!doc.contains("room") || !doc.at("room").contains("polygon")) {
    throw Error(ErrorCode::BadConfig, "config requires room.polygon");
  }
  if (doc.at("room").contains("units") && doc.at("room").at("units") != "meters") {
    throw Error(ErrorCode::BadConfig, "room units must be meters");
  }
  cfg.room_polygon = parse_polygon(doc.at("room").at("polygon"), "room.polygon");
  if (!polygon_is_simple(cfg.room_polygon) || polygon_area(cfg.room_polygon) < 1e-9) {
    throw Error(ErrorCode::DegenerateRoomPolygon, "room polygon must be simple with area > 0");
  }

  if (doc.contains("walls")) {
    for (const json& w : doc.at("walls")) {
      if (!w.is_array() || w.size() != 2) {
        throw Error(ErrorCode::BadConfig, "walls entries must be [[x,y],[x,y]]");
      }
      cfg.wall_segments.push_back(Segment{{w[0][0].get<double>(), w[0][1].get<double>()},
                                          {w[1][0].get<double>(), w[1][1].get<double>()}});
    }
  }

  if (!doc.contains("entry_zone")) {
    throw Error(ErrorCode::BadConfig, "config requires entry_zone");
  }
  cfg.entry_zone = parse_polygon(doc.at("entry_zone"), "entry_zone");
  bool touches = false;
  for (const Vec2& p : cfg.entry_zone) {
    if (point_in_polygon(p, cfg.room_polygon)) touches = true;
  }
  for (const Vec2& p : cfg.room_polygon) {
    if (point_in_polygon(p, cfg.entry_zone)) touches = true;
  }
  size_t en = cfg.entry_zone.size(), rn = cfg.room_polygon.size();
  for (size_t i = 0; i < en && !touches; ++i) {
    Segment se{cfg.entry_zone[i], cfg.entry_zone[(i + 1) % en]};
    for (size_t j = 0; j < rn && !touches; ++j) {
      Segment sr{cfg.room_polygon[j], cfg.room_polygon[(j + 1) % rn]};
      touches = segments_intersect(se, sr);
    }
  }
  if (!touches) {
    throw Error(ErrorCode::BadConfig, "entry_zone does not intersect the room polygon");
  }

  if (doc.contains("pods")) {
    for (const auto& [name, poly] : doc.at("pods").items()) {
      cfg.pod_regions[name] = parse_polygon(poly, "pods." + name);
    }
  }

  if (!doc.contains("calibration") || !doc.at("calibration").contains("pairs")) {
    throw Error(ErrorCode::MissingCalibration, "config requires calibration.pairs");
  }
  for (const json& p : doc.at("calibration").at("pairs")) {
    CalibrationPair pair;
    pair.pixel = {p.at("pixel")[0].get<double>(), p.at("pixel")[1].get<double>()};
    pair.map = {p.at("map")[0].get<double>(), p.at("map")[1].get<double>()};
    cfg.calibration_pairs.push_back(pair);
  }
  if (cfg.calibration_pairs.size() < 4) {
    throw Error(ErrorCode::MissingCalibration,
                "need >= 4 calibration pairs, got " + std::to_string(cfg.calibration_pairs.size()));
  }

  if (doc.contains("metric_params")) {
    parse_metric_params(doc.at("metric_params"), cfg.metric_params, cfg.mapping_params);
  }
  if (cfg.metric_params.pod_assignment_table.empty()) {
    // Default: pods in name order for either first-entry direction.
    std::vector<std::string> names;
    for (const auto& [name, poly] : cfg.pod_regions) names.push_back(name);
    cfg.metric_params.pod_assignment_table["left"] = names;
    cfg.metric_params.pod_assignment_table["right"] = names;
  }

  cfg.hierarchy = doc.contains("hierarchy") ? parse_hierarchy(doc.at("hierarchy"))
                                            : default_hierarchy();
  validate_hierarchy(cfg.hierarchy, known_metric_names());
  return cfg;
}

RoomConfig load_room_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config parse failure: ") + e.what());
  }
  return load_room_config(doc);
}

json metric_params_to_json(const MetricParams& p) {
  json j;
  j["entry_gap_general"] = p.entry_gap_general;
  j["entry_gap_second_third"] = p.entry_gap_second_third;
  j["penalty_rate"] = p.penalty_rate;
  j["pod_hold_min"] = p.pod_hold_min;
  j["pod_time_limit"] = p.pod_time_limit;
  j["wall_buffer"] = p.wall_buffer;
  j["threat_overlap_min"] = p.threat_overlap_min;
  j["gaze_required"] = p.gaze_required;
  j["floor_grid_cell"] = p.floor_grid_cell;
  j["floor_time_limit"] = p.floor_time_limit;
  j["keypoint_conf"] = p.keypoint_conf;
  json table = json::object();
  for (const auto& [dir, pods] : p.pod_assignment_table) table[dir] = pods;
  j["pod_assignment_table"] = table;
  return j;
}

json mapping_params_to_json(const MappingParams& p) {
  json j;
  j["alpha_min"] = p.alpha_min;
  j["alpha_max"] = p.alpha_max;
  j["alpha_dist_ref"] = p.alpha_dist_ref;
  j["process_noise"] = p.process_noise;
  j["measurement_noise"] = p.measurement_noise;
  j["fallback_lag"] = p.fallback_lag;
  j["max_speed"] = p.max_speed;
  j["entry_hysteresis"] = p.entry_hysteresis;
  j["calibration_tolerance"] = p.calibration_tolerance;
  j["gaze_half_angle_deg"] = p.gaze_half_angle_deg;
  return j;
}

void apply_param_override(MetricParams& metric, MappingParams& mapping, const std::string& key,
                          const std::string& value) {
  auto as_double = [&]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig, "param " + key + ": not a number: " + value);
    }
  };
  if (key == "entry_gap_general") metric.entry_gap_general = as_double();
  else if (key == "entry_gap_second_third") metric.entry_gap_second_third = as_double();
  else if (key == "penalty_rate") metric.penalty_rate = as_double();
  else if (key == "pod_hold_min") metric.pod_hold_min = as_double();
  else if (key == "pod_time_limit") metric.pod_time_limit = as_double();
  else if (key == "wall_buffer") metric.wall_buffer = as_double();
  else if (key == "threat_overlap_min") metric.threat_overlap_min = as_double();
  else if (key == "gaze_required") metric.gaze_required = (value == "true" || value == "1");
  else if (key == "floor_grid_cell") metric.floor_grid_cell = as_double();
  else if (key == "floor_time_limit") metric.floor_time_limit = as_double();
  else if (key == "keypoint_conf") metric.keypoint_conf = as_double();
  else if (key == "alpha_min") mapping.alpha_min = as_double();
  else if (key == "alpha_max") mapping.alpha_max = as_double();
  else if (key == "alpha_dist_ref") mapping.alpha_dist_ref = as_double();
  else if (key == "process_noise") mapping.process_noise = as_double();
  else if (key == "measurement_noise") mapping.measurement_noise = as_double();
  else if (key == "fallback_lag") mapping.fallback_lag = int(as_double());
  else if (key == "max_speed") mapping.max_speed = as_double();
  else if (key == "entry_hysteresis") mapping.entry_hysteresis = as_double();
  else if (key == "calibration_tolerance") mapping.calibration_tolerance = as_double();
  else if (key == "gaze_half_angle_deg") mapping.gaze_half_angle_deg = as_double();
  else throw Error(ErrorCode::BadConfig, "unknown param: " + key);
}

}  // namespace ecr
