#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ecr/geometry.hpp"
#include "ecr/homography.hpp"
#include "ecr/params.hpp"
#include "ecr/rollup.hpp"

#include <json.hpp>

namespace ecr {

// Scenario geometry plus analysis parameters. All map-space quantities are
// meters; the pixel side of the calibration pairs is image pixels.
struct RoomConfig {
  Polygon room_polygon;
  std::vector<Segment> wall_segments;
  Polygon entry_zone;
  std::map<std::string, Polygon> pod_regions;
  std::vector<CalibrationPair> calibration_pairs;
  MetricParams metric_params;
  MappingParams mapping_params;
  CtaHierarchy hierarchy;

  // Room boundary edges plus any interior wall segments.
  std::vector<Segment> all_walls() const;
};

// Parses the single-document JSON config (sections: room, walls, entry_zone,
// pods, calibration, metric_params, hierarchy) and enforces the structural
// invariants: simple room polygon, >= 4 calibration pairs, entry zone touching
// the room, hierarchy references resolving.
RoomConfig load_room_config(const nlohmann::json& doc);
RoomConfig load_room_config_file(const std::string& path);

CtaHierarchy parse_hierarchy(const nlohmann::json& doc);

nlohmann::json metric_params_to_json(const MetricParams& p);
nlohmann::json mapping_params_to_json(const MappingParams& p);

}  // namespace ecr
