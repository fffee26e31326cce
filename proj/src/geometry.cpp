#include "ecr/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ecr {

std::optional<Vec2> normalized(const Vec2& v, double eps) {
  double n = v.norm();
  if (n < eps) return std::nullopt;
  return Vec2{v.x / n, v.y / n};
}

double iou(const Box& a, const Box& b) {
  double ix1 = std::max(a.x1, b.x1);
  double iy1 = std::max(a.y1, b.y1);
  double ix2 = std::min(a.x2, b.x2);
  double iy2 = std::min(a.y2, b.y2);
  double iw = ix2 - ix1, ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

static bool point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double eps = 1e-12) {
  double d = cross(b - a, p - a);
  if (std::abs(d) > eps * std::max(1.0, (b - a).norm() * (p - a).norm())) return false;
  return p.x >= std::min(a.x, b.x) - eps && p.x <= std::max(a.x, b.x) + eps &&
         p.y >= std::min(a.y, b.y) - eps && p.y <= std::max(a.y, b.y) + eps;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if (point_on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  }
  // Even-odd ray cast along +x.
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x_at = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

bool point_in_triangle(const Vec2& p, const Vec2& v0, const Vec2& v1, const Vec2& v2) {
  double s1 = cross(v1 - v0, p - v0);
  double s2 = cross(v2 - v1, p - v1);
  double s3 = cross(v0 - v2, p - v2);
  bool has_neg = (s1 < 0) || (s2 < 0) || (s3 < 0);
  bool has_pos = (s1 > 0) || (s2 > 0) || (s3 > 0);
  return !(has_neg && has_pos);
}

double polygon_signed_area(const Polygon& poly) {
  double acc = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += cross(a, b);
  }
  return acc * 0.5;
}

Vec2 polygon_centroid(const Polygon& poly) {
  double a = polygon_signed_area(poly);
  size_t n = poly.size();
  if (n == 0) return {};
  if (std::abs(a) < 1e-15) {
    Vec2 mean{};
    for (const Vec2& p : poly) mean += p;
    return mean / double(n);
  }
  Vec2 c{};
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    double w = cross(p, q);
    c.x += (p.x + q.x) * w;
    c.y += (p.y + q.y) * w;
  }
  return c / (6.0 * a);
}

static int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  double v = cross(b - a, c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool segments_intersect(const Segment& s1, const Segment& s2) {
  int o1 = orientation(s1.a, s1.b, s2.a);
  int o2 = orientation(s1.a, s1.b, s2.b);
  int o3 = orientation(s2.a, s2.b, s1.a);
  int o4 = orientation(s2.a, s2.b, s1.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && point_on_segment(s2.a, s1.a, s1.b)) return true;
  if (o2 == 0 && point_on_segment(s2.b, s1.a, s1.b)) return true;
  if (o3 == 0 && point_on_segment(s1.a, s2.a, s2.b)) return true;
  if (o4 == 0 && point_on_segment(s1.b, s2.a, s2.b)) return true;
  return false;
}

bool polygon_is_simple(const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    if ((poly[(i + 1) % n] - poly[i]).norm() < 1e-12) return false;
  }
  for (size_t i = 0; i < n; ++i) {
    Segment si{poly[i], poly[(i + 1) % n]};
    for (size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share a vertex by construction).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      Segment sj{poly[j], poly[(j + 1) % n]};
      if (segments_intersect(si, sj)) return false;
    }
  }
  return true;
}

Box polygon_bounds(const Polygon& poly) {
  Box b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
        std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec2& p : poly) {
    b.x1 = std::min(b.x1, p.x);
    b.y1 = std::min(b.y1, p.y);
    b.x2 = std::max(b.x2, p.x);
    b.y2 = std::max(b.y2, p.y);
  }
  return b;
}

double dist_point_segment(const Vec2& p, const Segment& s) {
  Vec2 d = s.b - s.a;
  double len2 = d.squared_norm();
  if (len2 < 1e-24) return (p - s.a).norm();
  double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return (p - (s.a + d * t)).norm();
}

std::optional<double> ray_segment_distance(const Vec2& origin, const Vec2& dir, const Segment& seg) {
  // Solve origin + t*dir = a + u*(b-a), t >= 0, u in [0,1].
  Vec2 e = seg.b - seg.a;
  double denom = cross(dir, e);
  Vec2 w = seg.a - origin;
  if (std::abs(denom) < 1e-15) {
    // Parallel: hits only if collinear; take nearest endpoint ahead of the ray.
    if (std::abs(cross(w, dir)) > 1e-12) return std::nullopt;
    double t1 = dot(seg.a - origin, dir);
    double t2 = dot(seg.b - origin, dir);
    double t = std::numeric_limits<double>::max();
    if (t1 >= 0) t = std::min(t, t1);
    if (t2 >= 0) t = std::min(t, t2);
    if (t == std::numeric_limits<double>::max()) return std::nullopt;
    return t;
  }
  double t = cross(w, e) / denom;
  double u = cross(w, dir) / denom;
  if (t < 0.0 || u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

static void project_onto_axis(const Vec2& axis, const Vec2* pts, int n, double& lo, double& hi) {
  lo = hi = dot(axis, pts[0]);
  for (int i = 1; i < n; ++i) {
    double v = dot(axis, pts[i]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

bool triangle_intersects_box(const Vec2& v0, const Vec2& v1, const Vec2& v2, const Box& box) {
  Vec2 tri[3] = {v0, v1, v2};
  Vec2 quad[4] = {{box.x1, box.y1}, {box.x2, box.y1}, {box.x2, box.y2}, {box.x1, box.y2}};

  Vec2 axes[5];
  int n_axes = 0;
  axes[n_axes++] = {1, 0};
  axes[n_axes++] = {0, 1};
  for (int i = 0; i < 3; ++i) {
    Vec2 e = tri[(i + 1) % 3] - tri[i];
    if (e.squared_norm() < 1e-24) continue;  // degenerate edge contributes no axis
    axes[n_axes++] = {-e.y, e.x};
  }

  for (int i = 0; i < n_axes; ++i) {
    double t_lo, t_hi, b_lo, b_hi;
    project_onto_axis(axes[i], tri, 3, t_lo, t_hi);
    project_onto_axis(axes[i], quad, 4, b_lo, b_hi);
    if (t_hi < b_lo || b_hi < t_lo) return false;
  }
  return true;
}

Polygon clip_polygon_convex(const Polygon& subject, const Polygon& clip) {
  if (subject.empty() || clip.size() < 3) return {};
  // Ensure counterclockwise clip ordering so "inside" is the left half-plane.
  Polygon cw = clip;
  if (polygon_signed_area(cw) < 0) std::reverse(cw.begin(), cw.end());

  Polygon output = subject;
  size_t n = cw.size();
  for (size_t i = 0; i < n && !output.empty(); ++i) {
    const Vec2& a = cw[i];
    const Vec2& b = cw[(i + 1) % n];
    Vec2 edge = b - a;
    Polygon input;
    input.swap(output);
    size_t m = input.size();
    for (size_t j = 0; j < m; ++j) {
      const Vec2& cur = input[j];
      const Vec2& nxt = input[(j + 1) % m];
      double side_cur = cross(edge, cur - a);
      double side_nxt = cross(edge, nxt - a);
      bool in_cur = side_cur >= 0.0;
      bool in_nxt = side_nxt >= 0.0;
      if (in_cur) output.push_back(cur);
      if (in_cur != in_nxt) {
        double t = side_cur / (side_cur - side_nxt);
        output.push_back(cur + (nxt - cur) * t);
      }
    }
  }
  return output;
}

}  // namespace ecr
