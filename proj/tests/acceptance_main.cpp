// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its own tolerance and runtime budget.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ecr/config.hpp"
#include "ecr/gaze.hpp"
#include "ecr/homography.hpp"
#include "ecr/ingest.hpp"
#include "ecr/metrics.hpp"
#include "ecr/pipeline.hpp"
#include "ecr/rollup.hpp"
#include "ecr/synthetic.hpp"
#include "ecr/tracking.hpp"

namespace fs = std::filesystem;
using namespace ecr;
using nlohmann::json;

namespace {

struct Criterion {
  std::string name;
  bool passed = false;
  double runtime_ms = 0.0;
  double budget_ms = 0.0;
  std::string detail;
};

RoomConfig base_config() {
  return load_room_config_file(std::string(FIXTURES_DIR) + "/room_default.json");
}

ScenarioScript load_fixture(const std::string& name) {
  return load_scenario_file(std::string(FIXTURES_DIR) + "/" + name);
}

template <typename F>
Criterion run_criterion(const std::string& name, double budget_ms, F&& body) {
  Criterion c;
  c.name = name;
  c.budget_ms = budget_ms;
  auto start = std::chrono::steady_clock::now();
  try {
    c.detail = body();
    c.passed = true;
  } catch (const std::exception& e) {
    c.detail = e.what();
    c.passed = false;
  }
  auto end = std::chrono::steady_clock::now();
  c.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
  if (c.passed && c.runtime_ms > c.budget_ms) {
    c.passed = false;
    c.detail = "runtime budget exceeded";
  }
  return c;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

// --- C1: alpha-schedule anchors ---------------------------------------------
std::string criterion_alpha() {
  for (double half_life : {1.0, 2.0, 3.0, 7.0}) {
    double a1 = alpha_schedule(1, 1.0, half_life);
    require(a1 == 0.0, "alpha(1) != 0 for H=" + std::to_string(half_life));
    double ah = alpha_schedule(int(half_life) + 1, 1.0, half_life);
    require(std::abs(ah - 0.5) <= 1e-12,
            "alpha(H+1) off by " + std::to_string(std::abs(ah - 0.5)));
  }
  return "alpha(1) = 0 and alpha(H+1) = 0.5 within 1e-12";
}

// --- C2: gaze span ------------------------------------------------------------
std::string criterion_gaze_span() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec2 dir = *normalized({u(rng), u(rng) + ((u(rng) >= 0) ? 1e-3 : -1e-3)});
    Vec2 origin{u(rng) * 500, u(rng) * 500};
    double len = 1.0 + std::abs(u(rng)) * 400.0;
    auto tri = gaze_triangle(origin, dir, 10.0, len);
    Vec2 arm1 = tri[1] - tri[0];
    Vec2 arm2 = tri[2] - tri[0];
    double angle = std::acos(std::clamp(dot(arm1, arm2) / (arm1.norm() * arm2.norm()), -1.0, 1.0));
    worst = std::max(worst, std::abs(angle - 20.0 * M_PI / 180.0));
  }
  require(worst <= 1e-9, "span deviates by " + std::to_string(worst) + " rad");
  return "20 degree span across 1000 poses, max deviation " + std::to_string(worst);
}

// --- C3: equal-weight roll-up == arithmetic means ----------------------------
std::string criterion_equal_weight_rollup() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& metrics = known_metric_names();
  for (int iter = 0; iter < 100; ++iter) {
    CtaHierarchy h;
    HierarchyNode root;
    root.id = "root";
    root.level = 0;
    int groups = 1 + int(rng() % 3);
    std::size_t consumed = 0;
    std::vector<std::vector<std::string>> group_metrics(groups);
    for (int g = 0; g < groups; ++g) {
      HierarchyNode group;
      group.id = "g" + std::to_string(g);
      group.level = 2;
      int leaves = 1 + int(rng() % 3);
      for (int l = 0; l < leaves && consumed < metrics.size(); ++l, ++consumed) {
        HierarchyNode leaf;
        leaf.id = "leaf_" + metrics[consumed];
        leaf.level = 4;
        leaf.metric = metrics[consumed];
        group.children.push_back({leaf.id, 1.0});
        group_metrics[g].push_back(metrics[consumed]);
        h.nodes.push_back(std::move(leaf));
      }
      if (group.children.empty()) continue;
      root.children.push_back({group.id, 1.0});
      h.nodes.push_back(std::move(group));
    }
    h.nodes.insert(h.nodes.begin(), root);

    LeafValues leaves;
    for (const std::string& m : metrics) leaves[m] = u(rng);
    ScoreSheet ours = run_rollup(h, {leaves});
    ScoreSheet oracle = oracle_rollup(h, {leaves});

    double mean_of_groups = 0.0;
    int counted = 0;
    for (int g = 0; g < groups; ++g) {
      if (group_metrics[g].empty()) continue;
      double mean = 0.0;
      for (const std::string& m : group_metrics[g]) mean += *leaves[m];
      mean /= double(group_metrics[g].size());
      const NodeScore& ns = ours.trials[0].at("g" + std::to_string(g));
      require(std::abs(*ns.raw - mean) <= 1e-12, "group mean mismatch");
      mean_of_groups += mean;
      ++counted;
    }
    mean_of_groups /= double(counted);
    require(std::abs(*ours.trials[0].at("root").raw - mean_of_groups) <= 1e-12,
            "root mean mismatch");
    require(std::abs(*ours.trials[0].at("root").raw - *oracle.trials[0].at("root").raw) <= 1e-12,
            "engine vs oracle mismatch");
  }
  return "100 random equal-weight trees match arithmetic means and the oracle";
}

// --- C4: homography recovery -------------------------------------------------
std::string criterion_homography() {
  Eigen::Matrix3d truth;
  truth << 1.1, 0.08, 25.0, -0.15, 0.95, 8.0, 8e-5, -1.2e-4, 1.0;
  Homography reference(truth);
  std::vector<CalibrationPair> pairs;
  for (Vec2 p : {Vec2{20, 30}, Vec2{620, 50}, Vec2{600, 440}, Vec2{40, 410}, Vec2{320, 240},
                 Vec2{150, 330}}) {
    pairs.push_back({p, reference.project(p)});
  }
  Homography est = estimate_homography(pairs);
  Eigen::Matrix3d diff = est.matrix() / est.matrix()(2, 2) - truth / truth(2, 2);
  require(diff.cwiseAbs().maxCoeff() < 1e-9,
          "recovery error " + std::to_string(diff.cwiseAbs().maxCoeff()));

  Homography inv = est.inverse();
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 600.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec2 p{u(rng), u(rng)};
    worst = std::max(worst, (inv.project(est.project(p)) - p).norm());
  }
  require(worst < 1e-6, "round trip error " + std::to_string(worst));
  return "recovery within 1e-9, 1000-point round trip max " + std::to_string(worst);
}

// --- C5: tracker fixtures ----------------------------------------------------
std::string criterion_tracker() {
  ScenarioScript occlusion = load_fixture("scenario_occlusion4.json");
  auto [seq, truth] = render_scenario(occlusion);
  std::vector<Track> tracks = run_tracker(seq);
  require(tracks.size() == 4, "expected 4 tracks, got " + std::to_string(tracks.size()));
  int switches = oracle_track_assignment(tracks, truth);
  require(switches == 0, std::to_string(switches) + " identity switches");

  // Noiseless single agent: tracked boxes equal input boxes exactly.
  FrameSequence single;
  single.fps = 30;
  for (int f = 0; f < 60; ++f) {
    Detection det;
    det.frame_index = f;
    det.bbox = Box{100.0 + 2.5 * f, 200.0, 140.0 + 2.5 * f, 280.0};
    for (auto& k : det.keypoints) k = Keypoint{det.bbox.center().x, det.bbox.center().y, 0.9};
    single.frames.push_back(Frame{f, {det}});
  }
  std::vector<Track> solo = run_tracker(single);
  require(solo.size() == 1, "single agent should yield one track");
  require(solo[0].observations.size() == 60, "track must cover all frames");
  for (int f = 0; f < 60; ++f) {
    const Box& b = solo[0].observations.at(f).bbox;
    const Box& expect = single.frames[f].detections[0].bbox;
    require(b.x1 == expect.x1 && b.y1 == expect.y1 && b.x2 == expect.x2 && b.y2 == expect.y2,
            "tracked box differs from input at frame " + std::to_string(f));
  }
  return "4-track occlusion run with 0 switches; single-agent boxes exact";
}

// --- C6: metric-oracle equivalence --------------------------------------------
std::string criterion_metric_oracle() {
  RoomConfig base = base_config();
  double worst_truth = 0.0, worst_noisy = 0.0;
  int truth_checked = 0, noisy_checked = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ScenarioScript script = random_scenario(seed, base);
    auto [seq, truth] = render_scenario(script);

    TruthContext tc = make_truth_context(script, truth);
    MetricContext ctx(tc.trajectories, tc.roles, tc.tracks, tc.gaze, script.room, script.fps);
    std::vector<MetricResult> engine = compute_all_metrics(ctx);
    for (const MetricResult& m : engine) {
      std::optional<double> oracle = oracle_metric(m.metric_name, script, truth);
      require(m.score.has_value() == oracle.has_value(),
              "seed " + std::to_string(seed) + " " + m.metric_name + ": applicability mismatch");
      if (m.score) {
        double diff = std::abs(*m.score - *oracle);
        worst_truth = std::max(worst_truth, diff);
        require(diff < 1e-9, "seed " + std::to_string(seed) + " " + m.metric_name +
                                 " truth diff " + std::to_string(diff));
        ++truth_checked;
      }
    }

    AnalysisResult noisy = analyze_sequence(seq, script.room);
    for (const MetricResult& m : noisy.metrics) {
      std::optional<double> oracle = oracle_metric(m.metric_name, script, truth);
      if (m.score && oracle) {
        double diff = std::abs(*m.score - *oracle);
        worst_noisy = std::max(worst_noisy, diff);
        require(diff <= 0.05, "seed " + std::to_string(seed) + " " + m.metric_name +
                                  " noisy diff " + std::to_string(diff));
        ++noisy_checked;
      }
    }
  }
  std::ostringstream out;
  out << truth_checked << " truth comparisons (max " << worst_truth << "), " << noisy_checked
      << " noisy comparisons (max " << worst_noisy << ")";
  return out.str();
}

// --- C7: range closure --------------------------------------------------------
std::string criterion_range_closure() {
  RoomConfig base = base_config();
  int scores_checked = 0;
  for (std::uint64_t seed = 1000; seed < 1500; ++seed) {
    ScenarioScript script = random_scenario(seed, base);
    auto [seq, truth] = render_scenario(script);
    AnalysisResult result = analyze_sequence(seq, script.room);

    for (const auto& [id, samples] : result.trajectories) {
      for (const TrajectorySample& s : samples) {
        require(s.map_position.finite() && s.pixel_position.finite(),
                "non-finite trajectory sample, seed " + std::to_string(seed));
      }
    }
    for (const auto& [id, per_frame] : result.gaze) {
      for (const auto& [frame, rec] : per_frame) {
        require(rec.direction.finite() && rec.image_triangle[1].finite(),
                "non-finite gaze record, seed " + std::to_string(seed));
      }
    }
    std::vector<LeafValues> leaves = {metric_leaf_values(result.metrics)};
    ScoreSheet sheet = run_rollup(base.hierarchy, leaves);
    for (const MetricResult& m : result.metrics) {
      if (!m.score) continue;
      require(std::isfinite(*m.score) && *m.score >= 0.0 && *m.score <= 1.0,
              m.metric_name + " out of range, seed " + std::to_string(seed));
      ++scores_checked;
    }
    for (const auto& [id, ns] : sheet.trials[0]) {
      if (ns.smoothed) {
        require(std::isfinite(*ns.smoothed) && *ns.smoothed >= 0.0 && *ns.smoothed <= 1.0,
                "rollup out of range, seed " + std::to_string(seed));
      }
    }
  }
  return std::to_string(scores_checked) + " applicable scores all within [0,1], no NaN";
}

// --- C8: doctrine contrast -----------------------------------------------------
std::string criterion_doctrine_contrast() {
  RoomConfig base = base_config();

  ScenarioScript perfect = load_fixture("scenario_perfect.json");
  auto [pseq, ptruth] = render_scenario(perfect);
  AnalysisResult pres = analyze_sequence(pseq, perfect.room);
  double lowest = 1.0;
  for (const MetricResult& m : pres.metrics) {
    require(m.score.has_value(), "perfect fixture: " + m.metric_name + " not applicable");
    lowest = std::min(lowest, *m.score);
    require(*m.score >= 0.9, "perfect fixture: " + m.metric_name + " = " +
                                 std::to_string(*m.score) + " < 0.9");
  }
  ScoreSheet psheet = run_rollup(base.hierarchy, {metric_leaf_values(pres.metrics)});
  require(psheet.trials[0].at("root").band == ScoreBand::Above,
          "perfect fixture root not Above");

  ScenarioScript patho = load_fixture("scenario_pathological.json");
  auto [bseq, btruth] = render_scenario(patho);
  AnalysisResult bres = analyze_sequence(bseq, patho.room);
  ScoreSheet bsheet = run_rollup(base.hierarchy, {metric_leaf_values(bres.metrics)});
  require(bsheet.trials[0].at("root").band == ScoreBand::Below,
          "pathological fixture root not Below");

  std::ostringstream out;
  out << "perfect fixture min metric " << lowest << ", root Above; pathological root Below";
  return out.str();
}

// --- C9: end-to-end determinism -------------------------------------------------
std::string criterion_determinism() {
  fs::path dir = fs::temp_directory_path() / "ecr_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string bin = ECR_BIN;
  std::string config = std::string(FIXTURES_DIR) + "/room_default.json";
  std::string script = std::string(FIXTURES_DIR) + "/scenario_perfect.json";

  // Identical command lines for both runs (only the working directory moves)
  // so the echoed manifests must come out byte-identical too.
  auto run_once = [&](const fs::path& out) {
    fs::create_directories(out);
    auto shell = [&](const std::string& cmd) {
      std::string full = "cd " + out.string() + " && " + cmd + " > /dev/null 2>&1";
      int status = std::system(full.c_str());
      require(WEXITSTATUS(status) == 0, "command failed: " + cmd);
    };
    shell(bin + " synth --script " + script + " --out synth");
    shell(bin + " analyze --detections synth/detections.jsonl --config " + config +
          " --fps 30 --out analysis");
    shell(bin + " rollup analysis/metrics.json --config " + config + " --out rollup");
    shell(bin + " report --config " + config +
          " --trajectories analysis/trajectories.jsonl --gaze analysis/gaze.jsonl" +
          " --metrics analysis/metrics.json --out report");
  };

  run_once(dir / "run1");
  run_once(dir / "run2");

  int compared = 0;
  for (auto it = fs::recursive_directory_iterator(dir / "run1");
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    fs::path rel = fs::relative(it->path(), dir / "run1");
    fs::path twin = dir / "run2" / rel;
    require(fs::exists(twin), "missing twin file " + rel.string());
    std::ifstream a(it->path(), std::ios::binary), b(twin, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    require(sa.str() == sb.str(), "byte mismatch in " + rel.string());
    ++compared;
  }
  require(compared >= 10, "too few files compared");
  return std::to_string(compared) + " bundle files byte-identical across reruns";
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(run_criterion("C1 alpha-schedule anchors", 1.0, criterion_alpha));
  results.push_back(run_criterion("C2 gaze span 20 degrees", 1000.0, criterion_gaze_span));
  results.push_back(
      run_criterion("C3 equal-weight roll-up", 1000.0, criterion_equal_weight_rollup));
  results.push_back(run_criterion("C4 homography recovery", 1000.0, criterion_homography));
  results.push_back(run_criterion("C5 tracker fixtures", 5000.0, criterion_tracker));
  results.push_back(
      run_criterion("C6 metric-oracle equivalence", 120000.0, criterion_metric_oracle));
  results.push_back(run_criterion("C7 range closure", 300000.0, criterion_range_closure));
  results.push_back(run_criterion("C8 doctrine contrast", 30000.0, criterion_doctrine_contrast));
  results.push_back(run_criterion("C9 end-to-end determinism", 60000.0, criterion_determinism));

  bool all_pass = true;
  for (const Criterion& c : results) {
    all_pass = all_pass && c.passed;
    std::printf("[%s] %-32s %9.1f ms (budget %.0f ms)  %s\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.runtime_ms, c.budget_ms, c.detail.c_str());
  }
  return all_pass ? 0 : 1;
}
