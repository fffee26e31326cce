#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/report.hpp"
#include "ecr/rollup.hpp"

using namespace ecr;
using nlohmann::json;

namespace {

RoomConfig base_config() {
  return load_room_config_file(std::string(FIXTURES_DIR) + "/room_default.json");
}

ScoreSheet demo_sheet(const CtaHierarchy& h, int trials) {
  std::vector<LeafValues> per_trial;
  for (int t = 0; t < trials; ++t) {
    LeafValues leaves;
    double base = 0.3 + 0.2 * t;
    for (const std::string& name : known_metric_names()) {
      leaves[name] = std::min(1.0, base + 0.03 * double(name.size() % 5));
    }
    leaves["threat_clearance"] = std::nullopt;  // exercise N/A rendering
    per_trial.push_back(std::move(leaves));
  }
  return run_rollup(h, per_trial);
}

}  // namespace

TEST_CASE("score table renders one column per trial and N/A cells") {
  CtaHierarchy h = default_hierarchy();
  ScoreSheet sheet = demo_sheet(h, 1);
  std::string csv = render_score_table_csv(sheet, h);
  CHECK(csv.find("trial_1_raw") != std::string::npos);
  CHECK(csv.find("trial_2_raw") == std::string::npos);
  CHECK(csv.find("N/A") != std::string::npos);
  // N/A never renders as a number.
  std::string html = render_score_table_html(sheet, h);
  CHECK(html.find("band-na") != std::string::npos);
  CHECK(html.find(">N/A<") != std::string::npos);
}

TEST_CASE("table values equal the sheet at 3 decimals") {
  CtaHierarchy h = default_hierarchy();
  ScoreSheet sheet = demo_sheet(h, 2);
  std::string csv = render_score_table_csv(sheet, h);
  const NodeScore& root = sheet.trials[1].at("root");
  char expected[32];
  std::snprintf(expected, sizeof(expected), "%.3f", *root.smoothed);
  CHECK(csv.find(expected) != std::string::npos);
}

TEST_CASE("team table has one column per team") {
  CtaHierarchy h = default_hierarchy();
  std::vector<std::pair<std::string, ScoreSheet>> teams;
  for (int i = 1; i <= 4; ++i) {
    teams.emplace_back("Team " + std::to_string(i), demo_sheet(h, 3));
  }
  std::string csv = render_team_table_csv(teams, h);
  std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "node,name,level,Team 1,Team 2,Team 3,Team 4");
  std::string html = render_team_table_html(teams, h);
  CHECK(html.find("Team 4") != std::string::npos);
}

TEST_CASE("report output is deterministic") {
  CtaHierarchy h = default_hierarchy();
  ScoreSheet sheet = demo_sheet(h, 3);
  CHECK(render_score_table_csv(sheet, h) == render_score_table_csv(sheet, h));
  CHECK(render_score_table_html(sheet, h) == render_score_table_html(sheet, h));

  RoomConfig config = base_config();
  TrajectoryMap trajectories;
  for (int f = 0; f < 30; ++f) {
    TrajectorySample s;
    s.track_id = 1;
    s.frame_index = f;
    s.map_position = {1.0 + 0.1 * f, 2.0};
    trajectories[1].push_back(s);
  }
  std::vector<AgentRole> roles(1);
  roles[0].track_id = 1;
  roles[0].kind = RoleKind::TeamMember;
  CHECK(render_trajectory_overlay(trajectories, roles, config) ==
        render_trajectory_overlay(trajectories, roles, config));
}

TEST_CASE("trajectory overlay draws members as polylines and enemies as markers") {
  RoomConfig config = base_config();
  TrajectoryMap trajectories;
  std::vector<AgentRole> roles;
  for (int id = 1; id <= 4; ++id) {
    AgentRole r;
    r.track_id = id;
    r.kind = id <= 3 ? RoleKind::TeamMember : RoleKind::Enemy;
    roles.push_back(r);
    for (int f = 0; f < 10; ++f) {
      TrajectorySample s;
      s.track_id = id;
      s.frame_index = f;
      s.map_position = {1.0 * id, 2.0 + 0.1 * f};
      trajectories[id].push_back(s);
    }
  }
  std::string svg = render_trajectory_overlay(trajectories, roles, config);
  std::size_t polylines = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    pos += 9;
  }
  CHECK(polylines == 3);  // members only
  CHECK(svg.find("enemy-marker") != std::string::npos);
}

TEST_CASE("empty trajectories still render the room outline") {
  RoomConfig config = base_config();
  std::string svg = render_trajectory_overlay({}, {}, config);
  CHECK(svg.find("class=\"room\"") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
}

TEST_CASE("reference trajectories render a second panel") {
  RoomConfig config = base_config();
  TrajectoryMap team, reference;
  for (int f = 0; f < 5; ++f) {
    TrajectorySample s;
    s.track_id = 1;
    s.frame_index = f;
    s.map_position = {2.0, 2.0 + 0.1 * f};
    team[1].push_back(s);
    s.map_position = {3.0, 2.0 + 0.1 * f};
    reference[1].push_back(s);
  }
  std::vector<AgentRole> roles(1);
  roles[0].track_id = 1;
  roles[0].kind = RoleKind::TeamMember;
  std::string one = render_trajectory_overlay(team, roles, config);
  std::string two = render_trajectory_overlay(team, roles, config, &reference);
  CHECK(two.find("reference") != std::string::npos);
  CHECK(two.size() > one.size());
}

TEST_CASE("gaze overlay clips triangles to the room") {
  RoomConfig config = base_config();
  GazeTable gaze;
  GazeRecord rec;
  rec.track_id = 1;
  rec.frame_index = 5;
  rec.origin = {450, 400};
  rec.direction = {1, 0};
  rec.map_triangle = Polygon{{4.0, 3.0}, {7.5, 3.5}, {7.5, 2.5}};
  gaze[1][5] = rec;

  std::string svg = render_gaze_overlay(gaze, {5}, config);
  std::size_t triangles = 0, pos = 0;
  while ((pos = svg.find("gaze-triangle", pos)) != std::string::npos) {
    ++triangles;
    pos += 12;
  }
  // One style rule plus exactly one rendered polygon.
  CHECK(triangles == 2);

  std::string empty = render_gaze_overlay({}, {5}, config);
  CHECK(empty.find("<polygon class=\"gaze-triangle\"") == std::string::npos);
}

TEST_CASE("bundle echoes engine version and assets") {
  ReportBundle bundle;
  bundle.metadata = {{"command", "report"}};
  bundle.assets = {"scores.csv", "trajectories.svg"};
  json doc = bundle_to_json(bundle);
  CHECK(doc.at("engine_version").get<std::string>() == std::string("0.1.0"));
  CHECK(doc.at("assets").size() == 2);
}
