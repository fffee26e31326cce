#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/gaze.hpp"
#include "ecr/mapping.hpp"
#include "ecr/rollup.hpp"

namespace ecr {

// Score tables in the heatmap layout: rows are hierarchy nodes ordered by
// level then name, columns are trials (or teams). Values display with 3
// decimals; bands surface as CSS classes so the styling stays replaceable.
std::string render_score_table_csv(const ScoreSheet& sheet, const CtaHierarchy& hierarchy);
std::string render_score_table_html(const ScoreSheet& sheet, const CtaHierarchy& hierarchy);

// One column per team, using each team's final-trial smoothed scores.
std::string render_team_table_csv(const std::vector<std::pair<std::string, ScoreSheet>>& teams,
                                  const CtaHierarchy& hierarchy);
std::string render_team_table_html(const std::vector<std::pair<std::string, ScoreSheet>>& teams,
                                   const CtaHierarchy& hierarchy);

// Map-space drawing: room outline, entry zone, pods, team-member polylines,
// enemy markers. A reference trajectory set renders as a second panel.
std::string render_trajectory_overlay(const TrajectoryMap& trajectories,
                                      const std::vector<AgentRole>& roles,
                                      const RoomConfig& config,
                                      const TrajectoryMap* reference = nullptr);

// Clipped map-space gaze triangles at the selected frames.
std::string render_gaze_overlay(const GazeTable& gaze, const std::vector<std::int64_t>& frames,
                                const RoomConfig& config);

struct ReportBundle {
  nlohmann::json metadata;       // engine version, parameter echo, inputs
  std::vector<std::string> assets;
};

nlohmann::json bundle_to_json(const ReportBundle& bundle);

}  // namespace ecr
