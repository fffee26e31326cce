#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ecr {

enum class ScoreBand { Above, At, Below, NotApplicable };

const char* band_name(ScoreBand b);

struct BandThresholds {
  double above_min = 0.8;
  double at_min = 0.5;
};

ScoreBand band(std::optional<double> score, const BandThresholds& thresholds);

struct HierarchyChild {
  std::string id;
  double weight = 1.0;
};

struct HierarchyNode {
  std::string id;
  std::string name;
  int level = 0;
  std::vector<HierarchyChild> children;   // empty for leaves
  std::string metric;                     // leaf binding, empty for internal nodes
  std::optional<BandThresholds> bands;    // per-node override
};

struct SmoothingParams {
  double alpha_ceil = 1.0;
  double half_life = 3.0;  // trials until alpha reaches alpha_ceil/2
};

// Weighted aggregation DAG: one level-0 root, level-4 leaves bound to metric
// names, positive edge weights, no cycles, everything reachable from the root.
struct CtaHierarchy {
  std::vector<HierarchyNode> nodes;
  SmoothingParams smoothing;
  BandThresholds bands;
  bool smooth_leaves = true;

  const HierarchyNode* find(const std::string& id) const;
  const HierarchyNode* root() const;
};

// Throws CycleDetected / OrphanNode / UnknownMetricBinding / NonPositiveWeight
// / UnknownHierarchyNodeReference on the first violated invariant.
void validate_hierarchy(const CtaHierarchy& h, const std::vector<std::string>& known_metrics);

// The hierarchy the engine ships when a config has no `hierarchy` section.
// Only the leaf linkages stated in the source material are canonical; the
// upper levels are placeholder wiring meant to be replaced per program.
CtaHierarchy default_hierarchy();

// Canonical metric identifiers, in report order.
const std::vector<std::string>& known_metric_names();

using LeafValues = std::map<std::string, std::optional<double>>;  // metric name -> score

// Bottom-up weighted average (one trial). NotApplicable children are dropped
// and the remaining weights renormalized; a node with no applicable children
// is itself NotApplicable.
std::map<std::string, std::optional<double>> aggregate_trial(const CtaHierarchy& h,
                                                             const LeafValues& leaf_values);

// alpha(t) = alpha_ceil * (1 - exp(-ln2/H * (t-1))); trials are 1-based.
double alpha_schedule(int trial, double alpha_ceil, double half_life);

// One exponential smoothing step; at t=1 the smoothed score equals the raw
// value since alpha(1) = 0.
double smooth_scores(double prev_smoothed, double current_raw, double alpha);

struct NodeScore {
  std::optional<double> raw;
  std::optional<double> smoothed;
  ScoreBand band = ScoreBand::NotApplicable;
};

struct ScoreSheet {
  std::vector<std::string> node_order;                       // by level, then name
  std::vector<std::map<std::string, NodeScore>> trials;      // index 0 = trial 1
};

ScoreSheet run_rollup(const CtaHierarchy& h, const std::vector<LeafValues>& per_trial_leaves);

}  // namespace ecr
