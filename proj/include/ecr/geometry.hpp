#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace ecr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

// Counterclockwise rotation by `radians`.
inline Vec2 rotate(const Vec2& v, double radians) {
  double c = std::cos(radians), s = std::sin(radians);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

std::optional<Vec2> normalized(const Vec2& v, double eps = 1e-12);

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Axis-aligned box, corners (x1,y1) top-left-ish and (x2,y2); x1<x2, y1<y2.
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(x1 + x2) * 0.5, (y1 + y2) * 0.5}; }
  bool contains(const Vec2& p) const {
    return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2;
  }
  bool valid() const { return x1 < x2 && y1 < y2; }
};

double iou(const Box& a, const Box& b);

using Polygon = std::vector<Vec2>;

// Even-odd test; points on the boundary count as inside.
bool point_in_polygon(const Vec2& p, const Polygon& poly);

// Inclusive of edges.
bool point_in_triangle(const Vec2& p, const Vec2& v0, const Vec2& v1, const Vec2& v2);

// Signed shoelace area (positive for counterclockwise vertex order).
double polygon_signed_area(const Polygon& poly);
inline double polygon_area(const Polygon& poly) { return std::abs(polygon_signed_area(poly)); }

Vec2 polygon_centroid(const Polygon& poly);

// True when no two non-adjacent edges intersect and no edge is degenerate.
bool polygon_is_simple(const Polygon& poly);

Box polygon_bounds(const Polygon& poly);

double dist_point_segment(const Vec2& p, const Segment& s);

bool segments_intersect(const Segment& s1, const Segment& s2);

// Distance along the ray origin + t * dir (unit dir, t >= 0) to the segment,
// or nullopt when the ray misses it.
std::optional<double> ray_segment_distance(const Vec2& origin, const Vec2& dir, const Segment& seg);

// Separating-axis overlap test between a triangle and an axis-aligned box.
// Touching boundaries count as overlap.
bool triangle_intersects_box(const Vec2& v0, const Vec2& v1, const Vec2& v2, const Box& box);

// Sutherland-Hodgman clip of `subject` against a convex `clip` polygon
// (vertices in either winding). Returns empty when disjoint.
Polygon clip_polygon_convex(const Polygon& subject, const Polygon& clip);

}  // namespace ecr
