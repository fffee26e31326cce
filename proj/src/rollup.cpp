#include "ecr/rollup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "ecr/errors.hpp"

namespace ecr {

const char* band_name(ScoreBand b) {
  switch (b) {
    case ScoreBand::Above: return "above";
    case ScoreBand::At: return "at";
    case ScoreBand::Below: return "below";
    case ScoreBand::NotApplicable: return "n/a";
  }
  return "n/a";
}

ScoreBand band(std::optional<double> score, const BandThresholds& t) {
  if (!score) return ScoreBand::NotApplicable;
  if (*score >= t.above_min) return ScoreBand::Above;
  if (*score >= t.at_min) return ScoreBand::At;
  return ScoreBand::Below;
}

const HierarchyNode* CtaHierarchy::find(const std::string& id) const {
  for (const HierarchyNode& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const HierarchyNode* CtaHierarchy::root() const {
  for (const HierarchyNode& n : nodes) {
    if (n.level == 0) return &n;
  }
  return nullptr;
}

const std::vector<std::string>& known_metric_names() {
  static const std::vector<std::string> names = {
      "entrance_vectors",   "entrance_hesitation", "identify_capture_pod",
      "pod_capture_time",   "move_along_wall",     "threat_clearance",
      "threat_coverage",    "teammate_coverage",   "floor_coverage",
      "total_floor_coverage_time",
  };
  return names;
}

void validate_hierarchy(const CtaHierarchy& h, const std::vector<std::string>& known_metrics) {
  if (h.nodes.empty()) throw Error(ErrorCode::OrphanNode, "hierarchy has no nodes");

  std::set<std::string> ids;
  for (const HierarchyNode& n : h.nodes) {
    if (!ids.insert(n.id).second) {
      throw Error(ErrorCode::BadConfig, "duplicate node id '" + n.id + "'");
    }
  }

  int roots = 0;
  for (const HierarchyNode& n : h.nodes) {
    if (n.level == 0) ++roots;
  }
  if (roots != 1) {
    throw Error(ErrorCode::BadConfig,
                "expected exactly one level-0 root, found " + std::to_string(roots));
  }

  for (const HierarchyNode& n : h.nodes) {
    if (n.children.empty() && n.metric.empty()) {
      throw Error(ErrorCode::BadConfig, "node '" + n.id + "' has neither children nor a metric");
    }
    if (!n.children.empty() && !n.metric.empty()) {
      throw Error(ErrorCode::BadConfig, "node '" + n.id + "' is both leaf and parent");
    }
    if (!n.metric.empty() &&
        std::find(known_metrics.begin(), known_metrics.end(), n.metric) == known_metrics.end()) {
      throw Error(ErrorCode::UnknownMetricBinding,
                  "leaf '" + n.id + "' binds to unknown metric '" + n.metric + "'");
    }
    for (const HierarchyChild& c : n.children) {
      if (!h.find(c.id)) {
        throw Error(ErrorCode::UnknownHierarchyNodeReference,
                    "node '" + n.id + "' references missing child '" + c.id + "'");
      }
      if (!(c.weight > 0.0)) {
        throw Error(ErrorCode::NonPositiveWeight,
                    "edge " + n.id + " -> " + c.id + " has non-positive weight");
      }
    }
  }

  // Cycle check: DFS over the DAG with a recursion stack.
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    color[id] = 1;
    for (const HierarchyChild& c : h.find(id)->children) {
      int col = color[c.id];
      if (col == 1) {
        throw Error(ErrorCode::CycleDetected, "cycle passing through '" + c.id + "'");
      }
      if (col == 0) dfs(c.id);
    }
    color[id] = 2;
  };
  const HierarchyNode* root = h.root();
  dfs(root->id);

  for (const HierarchyNode& n : h.nodes) {
    if (color[n.id] == 0) {
      throw Error(ErrorCode::OrphanNode, "node '" + n.id + "' unreachable from root");
    }
  }
}

CtaHierarchy default_hierarchy() {
  CtaHierarchy h;
  auto leaf = [](const std::string& id, const std::string& name, const std::string& metric) {
    HierarchyNode n;
    n.id = id;
    n.name = name;
    n.level = 4;
    n.metric = metric;
    return n;
  };
  auto internal = [](const std::string& id, const std::string& name, int level,
                     std::vector<HierarchyChild> children) {
    HierarchyNode n;
    n.id = id;
    n.name = name;
    n.level = level;
    n.children = std::move(children);
    return n;
  };

  h.nodes = {
      internal("root", "Overall Performance", 0,
               {{"cognition", 1.0}, {"teamwork", 1.0}, {"behavioral", 1.0}}),
      internal("cognition", "Cognition", 1,
               {{"task_comprehension", 1.0}, {"situational_awareness", 1.0}}),
      internal("teamwork", "Teamwork", 1, {{"cooperation", 1.0}, {"role_clarity", 1.0}}),
      internal("behavioral", "Behavioral", 1, {{"general_execution", 1.0}}),
      internal("cooperation", "Cooperation", 2,
               {{"m_entrance_vectors", 1.0}, {"m_teammate_coverage", 1.0}}),
      internal("task_comprehension", "Task Comprehension", 3,
               {{"m_identify_capture_pod", 1.0}, {"m_threat_clearance", 1.0},
                {"m_floor_coverage", 1.0}}),
      internal("situational_awareness", "Situational Awareness and Adaptability", 3,
               {{"m_move_along_wall", 1.0}}),
      internal("role_clarity", "Role Clarity", 3,
               {{"m_identify_capture_pod", 1.0}, {"m_pod_capture_time", 1.0}}),
      // Catch-all for metrics whose upper linkage is site configuration.
      internal("general_execution", "General Execution", 3,
               {{"m_entrance_hesitation", 1.0}, {"m_threat_coverage", 1.0},
                {"m_total_floor_coverage_time", 1.0}}),
      leaf("m_entrance_vectors", "Entrance Vectors", "entrance_vectors"),
      leaf("m_entrance_hesitation", "Entrance Hesitation", "entrance_hesitation"),
      leaf("m_identify_capture_pod", "Identify and Capture POD", "identify_capture_pod"),
      leaf("m_pod_capture_time", "POD Capture Time", "pod_capture_time"),
      leaf("m_move_along_wall", "Move Along the Wall", "move_along_wall"),
      leaf("m_threat_clearance", "Threat Clearance", "threat_clearance"),
      leaf("m_threat_coverage", "Threat Coverage", "threat_coverage"),
      leaf("m_teammate_coverage", "Teammate Coverage", "teammate_coverage"),
      leaf("m_floor_coverage", "Floor Coverage", "floor_coverage"),
      leaf("m_total_floor_coverage_time", "Total Floor Coverage Time",
           "total_floor_coverage_time"),
  };
  return h;
}

std::map<std::string, std::optional<double>> aggregate_trial(const CtaHierarchy& h,
                                                             const LeafValues& leaf_values) {
  std::map<std::string, std::optional<double>> values;
  std::function<std::optional<double>(const HierarchyNode&)> eval =
      [&](const HierarchyNode& n) -> std::optional<double> {
    auto found = values.find(n.id);
    if (found != values.end()) return found->second;
    std::optional<double> result;
    if (!n.metric.empty()) {
      auto it = leaf_values.find(n.metric);
      result = (it == leaf_values.end()) ? std::nullopt : it->second;
    } else {
      double weight_sum = 0.0;
      double acc = 0.0;
      for (const HierarchyChild& c : n.children) {
        std::optional<double> child = eval(*h.find(c.id));
        if (!child) continue;  // NotApplicable children drop out of W_p
        weight_sum += c.weight;
        acc += c.weight * *child;
      }
      if (weight_sum > 0.0) result = acc / weight_sum;
    }
    values[n.id] = result;
    return result;
  };
  for (const HierarchyNode& n : h.nodes) eval(n);
  return values;
}

double alpha_schedule(int trial, double alpha_ceil, double half_life) {
  if (trial < 1) throw Error(ErrorCode::BadConfig, "trial index must be >= 1");
  if (!(half_life > 0.0)) throw Error(ErrorCode::BadConfig, "half-life must be > 0");
  double lambda = std::log(2.0) / half_life;
  return alpha_ceil * (1.0 - std::exp(-lambda * double(trial - 1)));
}

double smooth_scores(double prev_smoothed, double current_raw, double alpha) {
  return alpha * prev_smoothed + (1.0 - alpha) * current_raw;
}

ScoreSheet run_rollup(const CtaHierarchy& h, const std::vector<LeafValues>& per_trial_leaves) {
  validate_hierarchy(h, known_metric_names());

  ScoreSheet sheet;
  std::vector<const HierarchyNode*> ordered;
  for (const HierarchyNode& n : h.nodes) ordered.push_back(&n);
  std::sort(ordered.begin(), ordered.end(), [](const HierarchyNode* a, const HierarchyNode* b) {
    return a->level != b->level ? a->level < b->level : a->name < b->name;
  });
  for (const HierarchyNode* n : ordered) sheet.node_order.push_back(n->id);

  std::map<std::string, double> prev_smoothed;  // nodes that have a score so far

  for (int trial = 1; trial <= int(per_trial_leaves.size()); ++trial) {
    auto raw = aggregate_trial(h, per_trial_leaves[trial - 1]);
    double alpha = alpha_schedule(trial, h.smoothing.alpha_ceil, h.smoothing.half_life);

    std::map<std::string, NodeScore> scores;
    for (const HierarchyNode& n : h.nodes) {
      NodeScore ns;
      ns.raw = raw[n.id];
      bool is_leaf = !n.metric.empty();
      bool apply_smoothing = h.smooth_leaves || !is_leaf;
      auto prev = prev_smoothed.find(n.id);
      if (ns.raw && prev != prev_smoothed.end() && apply_smoothing) {
        ns.smoothed = smooth_scores(prev->second, *ns.raw, alpha);
      } else if (ns.raw) {
        ns.smoothed = *ns.raw;
      } else if (prev != prev_smoothed.end()) {
        // No new evidence this trial: carry the previous score forward.
        ns.smoothed = prev->second;
      }
      if (ns.smoothed) prev_smoothed[n.id] = *ns.smoothed;
      ns.band = band(ns.smoothed, n.bands ? *n.bands : h.bands);
      scores[n.id] = ns;
    }
    sheet.trials.push_back(std::move(scores));
  }
  return sheet;
}

}  // namespace ecr
