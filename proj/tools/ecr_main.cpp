#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/errors.hpp"
#include "ecr/ingest.hpp"
#include "ecr/pipeline.hpp"
#include "ecr/report.hpp"
#include "ecr/synthetic.hpp"
#include "ecr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ecr::Error(ecr::ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

struct ParamOverrides {
  std::vector<std::string> entries;

  void apply(ecr::RoomConfig& config) const {
    for (const std::string& kv : entries) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ecr::Error(ecr::ErrorCode::BadConfig, "--params expects key=value, got " + kv);
      }
      ecr::apply_param_override(config.metric_params, config.mapping_params, kv.substr(0, eq),
                                kv.substr(eq + 1));
    }
  }
};

json manifest_json(const std::string& command, const json& inputs, const ecr::RoomConfig* config,
                   double fps) {
  json m;
  m["engine_version"] = ecr::kEngineVersion;
  m["command"] = command;
  m["inputs"] = inputs;
  m["fps"] = fps;
  if (config) {
    m["params"]["metric_params"] = ecr::metric_params_to_json(config->metric_params);
    m["params"]["mapping_params"] = ecr::mapping_params_to_json(config->mapping_params);
  }
  return m;
}

int cmd_calibrate(const std::string& config_path, const ParamOverrides& overrides) {
  ecr::RoomConfig config = ecr::load_room_config_file(config_path);
  overrides.apply(config);
  ecr::Homography h = ecr::calibrate(config);
  std::cout << "homography (pixel -> map, h33 = 1):\n";
  const auto& m = h.matrix();
  for (int r = 0; r < 3; ++r) {
    std::cout << "  " << m(r, 0) << " " << m(r, 1) << " " << m(r, 2) << "\n";
  }
  double worst = 0.0;
  for (const ecr::CalibrationPair& p : config.calibration_pairs) {
    double err = (h.project(p.pixel) - p.map).norm();
    worst = std::max(worst, err);
    std::cout << "pair pixel(" << p.pixel.x << "," << p.pixel.y << ") -> map(" << p.map.x << ","
              << p.map.y << ") error " << err << " m\n";
  }
  std::cout << "max reprojection error: " << worst << " m\n";
  return 0;
}

void analyze_one(const std::string& detections_path, const ecr::RoomConfig& config, double fps,
                 const fs::path& out_dir) {
  fs::create_directories(out_dir);
  ecr::FrameSequence frames = ecr::parse_frames_file(detections_path, fps);
  if (frames.empty()) {
    std::cerr << "warning: " << detections_path << " has no detections; metrics are N/A\n";
  }
  ecr::AnalysisResult result = ecr::analyze_sequence(frames, config);

  write_json(out_dir / "metrics.json", ecr::analysis_to_json(result, config, fps));
  {
    std::ofstream out(out_dir / "tracks.jsonl", std::ios::binary);
    ecr::dump_tracks(result.tracks, out);
  }
  {
    std::ofstream out(out_dir / "trajectories.jsonl", std::ios::binary);
    ecr::dump_trajectories(result.trajectories, out);
  }
  {
    std::ofstream out(out_dir / "gaze.jsonl", std::ios::binary);
    ecr::dump_gaze(result.gaze, out);
  }
}

int cmd_analyze(const std::vector<std::string>& detections, const std::string& config_path,
                const std::string& out_dir, double fps, int jobs,
                const ParamOverrides& overrides) {
  ecr::RoomConfig config = ecr::load_room_config_file(config_path);
  overrides.apply(config);
  fs::create_directories(out_dir);

  if (detections.size() == 1) {
    analyze_one(detections[0], config, fps, out_dir);
  } else {
    // One subdirectory per trial; trials are independent.
    std::vector<std::exception_ptr> errors(detections.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
      for (;;) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= detections.size()) return;
          idx = next++;
        }
        try {
          analyze_one(detections[idx], config, fps,
                      fs::path(out_dir) / ("trial_" + std::to_string(idx + 1)));
        } catch (...) {
          errors[idx] = std::current_exception();
        }
      }
    };
    int n_threads = std::max(1, std::min<int>(jobs, int(detections.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  json inputs;
  inputs["detections"] = detections;
  inputs["config"] = config_path;
  write_json(fs::path(out_dir) / "manifest.json", manifest_json("analyze", inputs, &config, fps));
  return 0;
}

int cmd_track(const std::string& detections_path, const std::string& out_path, double fps) {
  ecr::FrameSequence frames = ecr::parse_frames_file(detections_path, fps);
  std::vector<ecr::Track> tracks = ecr::run_tracker(frames);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ecr::Error(ecr::ErrorCode::Io, "cannot write " + out_path);
  ecr::dump_tracks(tracks, out);
  return 0;
}

int cmd_synth(const std::string& script_path, const std::string& out_dir) {
  ecr::ScenarioScript script = ecr::load_scenario_file(script_path);
  auto [frames, truth] = ecr::render_scenario(script);
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "detections.jsonl", std::ios::binary);
    ecr::serialize_frames(frames, out);
  }
  write_json(fs::path(out_dir) / "ground_truth.json", ecr::ground_truth_to_json(truth));
  json inputs;
  inputs["script"] = script_path;
  inputs["seed"] = script.seed;
  write_json(fs::path(out_dir) / "manifest.json",
             manifest_json("synth", inputs, &script.room, script.fps));
  return 0;
}

int cmd_rollup(const std::vector<std::string>& metric_files, const std::string& config_path,
               const std::string& out_dir) {
  ecr::RoomConfig config = ecr::load_room_config_file(config_path);
  std::vector<ecr::LeafValues> trials;
  for (const std::string& path : metric_files) {
    std::ifstream in(path);
    if (!in) throw ecr::Error(ecr::ErrorCode::Io, "cannot open " + path);
    json doc;
    in >> doc;
    trials.push_back(ecr::leaf_values_from_json(doc));
  }
  ecr::ScoreSheet sheet = ecr::run_rollup(config.hierarchy, trials);
  fs::create_directories(out_dir);
  write_json(fs::path(out_dir) / "scores.json", ecr::score_sheet_to_json(sheet, config.hierarchy));
  write_file(fs::path(out_dir) / "scores.csv",
             ecr::render_score_table_csv(sheet, config.hierarchy));
  write_file(fs::path(out_dir) / "scores.html",
             ecr::render_score_table_html(sheet, config.hierarchy));
  json inputs;
  inputs["metrics"] = metric_files;
  inputs["config"] = config_path;
  write_json(fs::path(out_dir) / "manifest.json", manifest_json("rollup", inputs, &config, 0.0));
  return 0;
}

ecr::TrajectoryMap load_trajectory_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ecr::Error(ecr::ErrorCode::Io, "cannot open " + path);
  ecr::TrajectoryMap result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    ecr::TrajectorySample s;
    s.frame_index = rec.at("frame").get<std::int64_t>();
    s.track_id = rec.at("track").get<std::int64_t>();
    s.map_position = {rec.at("x_m").get<double>(), rec.at("y_m").get<double>()};
    result[s.track_id].push_back(s);
  }
  return result;
}

int cmd_report(const std::string& config_path, const std::string& trajectories_path,
               const std::string& gaze_path, const std::string& metrics_path,
               const std::string& reference_path, std::vector<std::int64_t> gaze_frames,
               const std::string& out_dir) {
  ecr::RoomConfig config = ecr::load_room_config_file(config_path);
  fs::create_directories(out_dir);
  ecr::ReportBundle bundle;
  json inputs;
  inputs["config"] = config_path;

  ecr::TrajectoryMap trajectories;
  std::vector<ecr::AgentRole> roles;
  if (!trajectories_path.empty()) {
    trajectories = load_trajectory_dump(trajectories_path);
    inputs["trajectories"] = trajectories_path;
  }
  if (!metrics_path.empty()) {
    std::ifstream in(metrics_path);
    if (!in) throw ecr::Error(ecr::ErrorCode::Io, "cannot open " + metrics_path);
    json doc;
    in >> doc;
    inputs["metrics"] = metrics_path;
    if (doc.contains("roles")) {
      for (const json& r : doc.at("roles")) {
        ecr::AgentRole role;
        role.track_id = r.at("track").get<std::int64_t>();
        std::string kind = r.at("role").get<std::string>();
        role.kind = kind == "team_member" ? ecr::RoleKind::TeamMember
                    : kind == "enemy"     ? ecr::RoleKind::Enemy
                                          : ecr::RoleKind::Unknown;
        if (r.contains("entry_order")) role.entry_order = r.at("entry_order").get<int>();
        if (r.contains("entry_time")) role.entry_time = r.at("entry_time").get<double>();
        roles.push_back(role);
      }
    }
  } else {
    for (const auto& [id, samples] : trajectories) {
      ecr::AgentRole role;
      role.track_id = id;
      role.kind = ecr::RoleKind::TeamMember;
      roles.push_back(role);
    }
  }

  if (!trajectories_path.empty()) {
    std::optional<ecr::TrajectoryMap> reference;
    if (!reference_path.empty()) {
      reference = load_trajectory_dump(reference_path);
      inputs["reference"] = reference_path;
    }
    write_file(fs::path(out_dir) / "trajectories.svg",
               ecr::render_trajectory_overlay(trajectories, roles, config,
                                              reference ? &*reference : nullptr));
    bundle.assets.push_back("trajectories.svg");
  }

  if (!gaze_path.empty()) {
    std::ifstream in(gaze_path);
    if (!in) throw ecr::Error(ecr::ErrorCode::Io, "cannot open " + gaze_path);
    ecr::GazeTable gaze;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      ecr::GazeRecord g;
      g.frame_index = rec.at("frame").get<std::int64_t>();
      g.track_id = rec.at("track").get<std::int64_t>();
      g.origin = {rec.at("origin")[0].get<double>(), rec.at("origin")[1].get<double>()};
      g.direction = {rec.at("direction")[0].get<double>(), rec.at("direction")[1].get<double>()};
      const json& tri = rec.at("triangle");
      for (int i = 0; i < 3; ++i) {
        g.image_triangle[i] = {tri[i][0].get<double>(), tri[i][1].get<double>()};
      }
      if (rec.contains("map_triangle")) {
        ecr::Polygon poly;
        for (const json& v : rec.at("map_triangle")) {
          poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        g.map_triangle = std::move(poly);
      }
      gaze[g.track_id][g.frame_index] = std::move(g);
    }
    inputs["gaze"] = gaze_path;
    if (gaze_frames.empty()) {
      // Default: a handful of evenly spaced frames across the record.
      std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = -1;
      for (const auto& [id, per_frame] : gaze) {
        if (per_frame.empty()) continue;
        lo = std::min(lo, per_frame.begin()->first);
        hi = std::max(hi, per_frame.rbegin()->first);
      }
      if (hi >= lo) {
        for (int i = 0; i < 4; ++i) gaze_frames.push_back(lo + (hi - lo) * i / 3);
      }
    }
    for (std::int64_t frame : gaze_frames) {
      std::string name = "gaze_" + std::to_string(frame) + ".svg";
      write_file(fs::path(out_dir) / name,
                 ecr::render_gaze_overlay(gaze, {frame}, config));
      bundle.assets.push_back(name);
    }
  }

  bundle.metadata = manifest_json("report", inputs, &config, 0.0);
  write_json(fs::path(out_dir) / "bundle.json", ecr::bundle_to_json(bundle));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECR drill video-analytics engine"};
  app.set_version_flag("--version", ecr::kEngineVersion);
  app.require_subcommand(1);

  ParamOverrides overrides;

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Check the calibration homography");
  std::string cal_config;
  calibrate->add_option("--config", cal_config, "Room config JSON")->required();
  calibrate->add_option("--params", overrides.entries, "key=value metric overrides");

  // synth
  auto* synth = app.add_subcommand("synth", "Render a synthetic scenario");
  std::string synth_script, synth_out;
  synth->add_option("--script", synth_script, "Scenario script JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // track
  auto* track = app.add_subcommand("track", "Run the tracker and dump (frame, id, bbox)");
  std::string track_dets, track_out;
  double track_fps = 30.0;
  track->add_option("--detections", track_dets, "Detection stream (JSONL)")->required();
  track->add_option("--out", track_out, "Output JSONL path")->required();
  track->add_option("--fps", track_fps, "Frames per second");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Full track/map/gaze/metrics pipeline");
  std::vector<std::string> analyze_dets;
  std::string analyze_config, analyze_out;
  double analyze_fps = 30.0;
  int analyze_jobs = 1;
  analyze->add_option("--detections", analyze_dets, "Detection stream(s), one per trial")
      ->required();
  analyze->add_option("--config", analyze_config, "Room config JSON")->required();
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--fps", analyze_fps, "Frames per second");
  analyze->add_option("--jobs", analyze_jobs, "Parallel trials");
  analyze->add_option("--params", overrides.entries, "key=value metric overrides");

  // rollup
  auto* rollup = app.add_subcommand("rollup", "Aggregate per-trial metrics up the hierarchy");
  std::vector<std::string> rollup_metrics;
  std::string rollup_config, rollup_out;
  rollup->add_option("metrics", rollup_metrics, "metrics.json files, trial order")->required();
  rollup->add_option("--config", rollup_config, "Room config JSON (hierarchy source)")
      ->required();
  rollup->add_option("--out", rollup_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Render overlays and the result bundle");
  std::string rep_config, rep_traj, rep_gaze, rep_metrics, rep_reference, rep_out;
  std::vector<std::int64_t> rep_frames;
  report->add_option("--config", rep_config, "Room config JSON")->required();
  report->add_option("--trajectories", rep_traj, "Trajectory dump (JSONL)");
  report->add_option("--gaze", rep_gaze, "Gaze dump (JSONL)");
  report->add_option("--metrics", rep_metrics, "metrics.json (role source)");
  report->add_option("--reference", rep_reference, "Reference trajectory dump for comparison");
  report->add_option("--frames", rep_frames, "Frames for gaze overlays");
  report->add_option("--out", rep_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed()) return cmd_calibrate(cal_config, overrides);
    if (synth->parsed()) return cmd_synth(synth_script, synth_out);
    if (track->parsed()) return cmd_track(track_dets, track_out, track_fps);
    if (analyze->parsed()) {
      return cmd_analyze(analyze_dets, analyze_config, analyze_out, analyze_fps, analyze_jobs,
                         overrides);
    }
    if (rollup->parsed()) return cmd_rollup(rollup_metrics, rollup_config, rollup_out);
    if (report->parsed()) {
      return cmd_report(rep_config, rep_traj, rep_gaze, rep_metrics, rep_reference, rep_frames,
                        rep_out);
    }
  } catch (const ecr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ecr::error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
