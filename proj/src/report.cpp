#include "ecr/report.hpp"

#include <algorithm>
#include <cstdio>

#include "ecr/version.hpp"

namespace ecr {

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_cell(const std::optional<double>& v) {
  return v ? fmt3(*v) : "N/A";
}

std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Fixed palette; cycles past 8 agents.
const char* agent_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

struct SvgFrame {
  double scale = 60.0;
  double pad = 24.0;
  Box bounds;
  double width() const { return (bounds.width()) * scale + 2 * pad; }
  double height() const { return (bounds.height()) * scale + 2 * pad; }
  double x(double map_x) const { return pad + (map_x - bounds.x1) * scale; }
  double y(double map_y) const { return pad + (bounds.y2 - map_y) * scale; }
};

SvgFrame make_frame(const RoomConfig& config) {
  SvgFrame f;
  f.bounds = polygon_bounds(config.room_polygon);
  Box zone = polygon_bounds(config.entry_zone);
  f.bounds.x1 = std::min(f.bounds.x1, zone.x1);
  f.bounds.y1 = std::min(f.bounds.y1, zone.y1);
  f.bounds.x2 = std::max(f.bounds.x2, zone.x2);
  f.bounds.y2 = std::max(f.bounds.y2, zone.y2);
  return f;
}

std::string draw_polygon(const SvgFrame& f, const Polygon& poly, const std::string& cls,
                         double off_x = 0.0) {
  std::string pts;
  for (const Vec2& p : poly) {
    if (!pts.empty()) pts += ' ';
    pts += svg_num(f.x(p.x) + off_x) + "," + svg_num(f.y(p.y));
  }
  return "  <polygon class=\"" + cls + "\" points=\"" + pts + "\"/>\n";
}

std::string draw_room(const SvgFrame& f, const RoomConfig& config, double off_x = 0.0) {
  std::string out;
  out += draw_polygon(f, config.room_polygon, "room", off_x);
  out += draw_polygon(f, config.entry_zone, "entry-zone", off_x);
  for (const auto& [name, poly] : config.pod_regions) {
    out += draw_polygon(f, poly, "pod", off_x);
  }
  for (const Segment& w : config.wall_segments) {
    out += "  <line class=\"wall\" x1=\"" + svg_num(f.x(w.a.x) + off_x) + "\" y1=\"" +
           svg_num(f.y(w.a.y)) + "\" x2=\"" + svg_num(f.x(w.b.x) + off_x) + "\" y2=\"" +
           svg_num(f.y(w.b.y)) + "\"/>\n";
  }
  return out;
}

const char* kSvgStyle =
    "  <style>\n"
    "    .room { fill: none; stroke: #333; stroke-width: 2; }\n"
    "    .entry-zone { fill: #cfe8ff; fill-opacity: 0.5; stroke: #4a90d9; }\n"
    "    .pod { fill: #eee; stroke: #999; stroke-dasharray: 4 3; }\n"
    "    .wall { stroke: #333; stroke-width: 2; }\n"
    "    .trajectory { fill: none; stroke-width: 2; }\n"
    "    .enemy-marker { fill: #fff; stroke: #000; }\n"
    "    .gaze-triangle { fill-opacity: 0.25; stroke-width: 1; }\n"
    "  </style>\n";

}  // namespace

std::string render_score_table_csv(const ScoreSheet& sheet, const CtaHierarchy& hierarchy) {
  std::string out = "node,name,level";
  for (std::size_t t = 0; t < sheet.trials.size(); ++t) {
    std::string n = std::to_string(t + 1);
    out += ",trial_" + n + "_raw,trial_" + n + "_smoothed,trial_" + n + "_band";
  }
  out += "\n";
  for (const std::string& id : sheet.node_order) {
    const HierarchyNode* node = hierarchy.find(id);
    out += id + "," + (node ? node->name : id) + "," + std::to_string(node ? node->level : 0);
    for (const auto& trial : sheet.trials) {
      auto it = trial.find(id);
      if (it == trial.end()) {
        out += ",N/A,N/A,n/a";
      } else {
        out += "," + fmt_cell(it->second.raw) + "," + fmt_cell(it->second.smoothed) + "," +
               band_name(it->second.band);
      }
    }
    out += "\n";
  }
  return out;
}

std::string render_score_table_html(const ScoreSheet& sheet, const CtaHierarchy& hierarchy) {
  std::string out =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\">\n"
      "<style>\n"
      "table.scores { border-collapse: collapse; font-family: sans-serif; }\n"
      "table.scores th, table.scores td { border: 1px solid #888; padding: 4px 10px; }\n"
      "td.band-above { background: #9fdf9f; }\n"
      "td.band-at { background: #ffe699; }\n"
      "td.band-below { background: #f4a7a7; }\n"
      "td.band-na { background: #ddd; color: #555; }\n"
      "</style></head><body>\n<table class=\"scores\">\n<tr><th>Node</th><th>Level</th>";
  for (std::size_t t = 0; t < sheet.trials.size(); ++t) {
    out += "<th>Trial " + std::to_string(t + 1) + "</th>";
  }
  out += "</tr>\n";
  for (const std::string& id : sheet.node_order) {
    const HierarchyNode* node = hierarchy.find(id);
    out += "<tr><td>" + (node ? node->name : id) + "</td><td>" +
           std::to_string(node ? node->level : 0) + "</td>";
    for (const auto& trial : sheet.trials) {
      auto it = trial.find(id);
      const NodeScore empty{};
      const NodeScore& ns = it == trial.end() ? empty : it->second;
      std::string cls = ns.band == ScoreBand::Above   ? "band-above"
                        : ns.band == ScoreBand::At    ? "band-at"
                        : ns.band == ScoreBand::Below ? "band-below"
                                                      : "band-na";
      out += "<td class=\"" + cls + "\">" + fmt_cell(ns.smoothed) + "</td>";
    }
    out += "</tr>\n";
  }
  out += "</table>\n</body></html>\n";
  return out;
}

std::string render_team_table_csv(const std::vector<std::pair<std::string, ScoreSheet>>& teams,
                                  const CtaHierarchy& hierarchy) {
  std::string out = "node,name,level";
  for (const auto& [name, sheet] : teams) out += "," + name;
  out += "\n";
  if (teams.empty()) return out;
  for (const std::string& id : teams.front().second.node_order) {
    const HierarchyNode* node = hierarchy.find(id);
    out += id + "," + (node ? node->name : id) + "," + std::to_string(node ? node->level : 0);
    for (const auto& [name, sheet] : teams) {
      if (sheet.trials.empty()) {
        out += ",N/A";
        continue;
      }
      auto it = sheet.trials.back().find(id);
      out += "," + (it == sheet.trials.back().end() ? "N/A" : fmt_cell(it->second.smoothed));
    }
    out += "\n";
  }
  return out;
}

std::string render_team_table_html(const std::vector<std::pair<std::string, ScoreSheet>>& teams,
                                   const CtaHierarchy& hierarchy) {
  std::string out =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\">\n"
      "<style>\n"
      "table.scores { border-collapse: collapse; font-family: sans-serif; }\n"
      "table.scores th, table.scores td { border: 1px solid #888; padding: 4px 10px; }\n"
      "td.band-above { background: #9fdf9f; }\n"
      "td.band-at { background: #ffe699; }\n"
      "td.band-below { background: #f4a7a7; }\n"
      "td.band-na { background: #ddd; color: #555; }\n"
      "</style></head><body>\n<table class=\"scores\">\n<tr><th>Node</th>";
  for (const auto& [name, sheet] : teams) out += "<th>" + name + "</th>";
  out += "</tr>\n";
  if (teams.empty()) return out + "</table>\n</body></html>\n";
  for (const std::string& id : teams.front().second.node_order) {
    const HierarchyNode* node = hierarchy.find(id);
    out += "<tr><td>" + (node ? node->name : id) + "</td>";
    for (const auto& [name, sheet] : teams) {
      const NodeScore empty{};
      const NodeScore* ns = &empty;
      if (!sheet.trials.empty()) {
        auto it = sheet.trials.back().find(id);
        if (it != sheet.trials.back().end()) ns = &it->second;
      }
      std::string cls = ns->band == ScoreBand::Above   ? "band-above"
                        : ns->band == ScoreBand::At    ? "band-at"
                        : ns->band == ScoreBand::Below ? "band-below"
                                                       : "band-na";
      out += "<td class=\"" + cls + "\">" + fmt_cell(ns->smoothed) + "</td>";
    }
    out += "</tr>\n";
  }
  out += "</table>\n</body></html>\n";
  return out;
}

std::string render_trajectory_overlay(const TrajectoryMap& trajectories,
                                      const std::vector<AgentRole>& roles,
                                      const RoomConfig& config, const TrajectoryMap* reference) {
  SvgFrame f = make_frame(config);
  int panels = reference ? 2 : 1;
  double panel_w = f.width();

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    svg_num(panel_w * panels) + "\" height=\"" + svg_num(f.height()) + "\">\n";
  out += kSvgStyle;

  auto draw_panel = [&](const TrajectoryMap& data, double off_x) {
    out += draw_room(f, config, off_x);
    std::size_t color_idx = 0;
    for (const AgentRole& role : roles) {
      auto it = data.find(role.track_id);
      if (it == data.end() || it->second.empty()) {
        ++color_idx;
        continue;
      }
      if (role.kind == RoleKind::TeamMember) {
        std::string pts;
        for (const TrajectorySample& s : it->second) {
          if (!pts.empty()) pts += ' ';
          pts += svg_num(f.x(s.map_position.x) + off_x) + "," + svg_num(f.y(s.map_position.y));
        }
        out += "  <polyline class=\"trajectory\" stroke=\"" +
               std::string(agent_color(color_idx)) + "\" points=\"" + pts + "\"/>\n";
      } else if (role.kind == RoleKind::Enemy) {
        // Enemies are marked, not traced.
        const TrajectorySample& s = it->second.front();
        out += "  <circle class=\"enemy-marker\" cx=\"" + svg_num(f.x(s.map_position.x) + off_x) +
               "\" cy=\"" + svg_num(f.y(s.map_position.y)) + "\" r=\"6\"/>\n";
      }
      ++color_idx;
    }
  };

  if (reference) {
    // Reference panel on the left, team on the right.
    out += draw_room(f, config, 0.0);
    std::size_t color_idx = 0;
    for (const auto& [id, samples] : *reference) {
      std::string pts;
      for (const TrajectorySample& s : samples) {
        if (!pts.empty()) pts += ' ';
        pts += svg_num(f.x(s.map_position.x)) + "," + svg_num(f.y(s.map_position.y));
      }
      out += "  <polyline class=\"trajectory reference\" stroke=\"" +
             std::string(agent_color(color_idx++)) + "\" points=\"" + pts + "\"/>\n";
    }
    draw_panel(trajectories, panel_w);
  } else {
    draw_panel(trajectories, 0.0);
  }

  out += "</svg>\n";
  return out;
}

std::string render_gaze_overlay(const GazeTable& gaze, const std::vector<std::int64_t>& frames,
                                const RoomConfig& config) {
  SvgFrame f = make_frame(config);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(f.width()) +
                    "\" height=\"" + svg_num(f.height()) + "\">\n";
  out += kSvgStyle;
  out += draw_room(f, config);

  std::size_t color_idx = 0;
  for (const auto& [track_id, per_frame] : gaze) {
    const char* color = agent_color(color_idx++);
    for (std::int64_t frame : frames) {
      auto it = per_frame.find(frame);
      if (it == per_frame.end() || !it->second.map_triangle) continue;
      std::string pts;
      for (const Vec2& v : *it->second.map_triangle) {
        if (!pts.empty()) pts += ' ';
        pts += svg_num(f.x(v.x)) + "," + svg_num(f.y(v.y));
      }
      out += "  <polygon class=\"gaze-triangle\" fill=\"" + std::string(color) + "\" stroke=\"" +
             color + "\" points=\"" + pts + "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

nlohmann::json bundle_to_json(const ReportBundle& bundle) {
  nlohmann::json doc;
  doc["engine_version"] = kEngineVersion;
  doc["metadata"] = bundle.metadata;
  doc["assets"] = bundle.assets;
  return doc;
}

}  // namespace ecr
