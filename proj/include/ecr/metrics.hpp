#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecr/config.hpp"
#include "ecr/gaze.hpp"
#include "ecr/mapping.hpp"
#include "ecr/rollup.hpp"
#include "ecr/tracking.hpp"

namespace ecr {

struct MetricEvidence {
  std::int64_t frame_begin = 0;
  std::int64_t frame_end = 0;
  std::string description;
};

struct MetricResult {
  std::string metric_name;
  std::optional<double> score;  // nullopt = NotApplicable
  std::map<std::int64_t, double> per_agent;
  std::vector<MetricEvidence> evidence;
};

// Shared exponential penalty: 1 when the delay is within the threshold,
// exp(-rate * delay_over) beyond it.
double exponential_penalty(double delay_over, double rate);

// Immutable per-trial analysis context shared by all ten metrics.
struct MetricContext {
  const TrajectoryMap& trajectories;
  const std::vector<AgentRole>& roles;
  const std::vector<Track>& tracks;
  const GazeTable& gaze;
  const RoomConfig& config;
  double fps;

  MetricContext(const TrajectoryMap& trajectories_, const std::vector<AgentRole>& roles_,
                const std::vector<Track>& tracks_, const GazeTable& gaze_,
                const RoomConfig& config_, double fps_);

  // Derived lookups.
  std::vector<AgentRole> members;  // entry order
  std::vector<std::int64_t> enemy_ids;
  std::map<std::int64_t, const Track*> track_by_id;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = -1;

  const TrajectorySample* sample_at(std::int64_t track_id, std::int64_t frame) const;
  const Detection* observation_at(std::int64_t track_id, std::int64_t frame) const;
  const GazeRecord* gaze_at(std::int64_t track_id, std::int64_t frame) const;

 private:
  std::map<std::int64_t, std::map<std::int64_t, const TrajectorySample*>> sample_index_;
};

// Entry direction used by entrance_vectors and the POD assignment table.
enum class EntrySide { Left, Right };
const char* entry_side_name(EntrySide s);

// Side of the door normal the entrant moves to over the first half second
// after leaving the entry zone.
std::optional<EntrySide> entry_direction(const MetricContext& ctx, const AgentRole& member);

MetricResult entrance_vectors(const MetricContext& ctx);
MetricResult entrance_hesitation(const MetricContext& ctx);
MetricResult identify_capture_pod(const MetricContext& ctx);
MetricResult pod_capture_time(const MetricContext& ctx);
MetricResult move_along_wall(const MetricContext& ctx);
MetricResult threat_clearance(const MetricContext& ctx);
MetricResult threat_coverage(const MetricContext& ctx);
MetricResult teammate_coverage(const MetricContext& ctx);
MetricResult floor_coverage(const MetricContext& ctx);
MetricResult total_floor_coverage_time(const MetricContext& ctx);

// All ten, in canonical order.
std::vector<MetricResult> compute_all_metrics(const MetricContext& ctx);

// Leaf values keyed by metric name, for the roll-up.
LeafValues metric_leaf_values(const std::vector<MetricResult>& results);

// Rasterized visual-coverage state for metrics 9 and 10.
struct CoverageGrid {
  double cell = 0.25;
  Vec2 origin;  // lower-left corner of cell (0,0)
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> interior;  // 1 when the cell center is in the room
  std::vector<std::uint8_t> covered;
  int interior_count = 0;
  int covered_count = 0;
  std::optional<double> first_full_time;

  int index(int ix, int iy) const { return iy * nx + ix; }
  Vec2 center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * cell, origin.y + (iy + 0.5) * cell};
  }
};

CoverageGrid compute_coverage(const MetricContext& ctx);

}  // namespace ecr
