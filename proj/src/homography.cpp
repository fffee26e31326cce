#include "ecr/homography.hpp"

#include <cmath>

#include "ecr/errors.hpp"

namespace ecr {

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  double h33 = m_(2, 2);
  if (std::abs(h33) < 1e-15) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography has h33 ~ 0");
  }
  m_ /= h33;
  if (std::abs(m_.determinant()) < 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "homography not invertible");
  }
}

Vec2 Homography::project(const Vec2& p) const {
  Eigen::Vector3d v = m_ * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::abs(v.z()) <= 1e-12) {
    throw Error(ErrorCode::PointAtInfinity,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") maps to infinity");
  }
  return {v.x() / v.z(), v.y() / v.z()};
}

Homography Homography::inverse() const {
  return Homography(Eigen::Matrix3d(m_.inverse()));
}

namespace {

// Similarity transform moving the centroid to the origin and the mean
// distance to sqrt(2); standard conditioning for the DLT system.
Eigen::Matrix3d normalizing_transform(const std::vector<Vec2>& pts) {
  Vec2 mean{};
  for (const Vec2& p : pts) mean += p;
  mean = mean / double(pts.size());
  double mean_dist = 0.0;
  for (const Vec2& p : pts) mean_dist += (p - mean).norm();
  mean_dist /= double(pts.size());
  double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << scale, 0, -scale * mean.x,
       0, scale, -scale * mean.y,
       0, 0, 1;
  return t;
}

bool three_collinear(const Vec2& a, const Vec2& b, const Vec2& c) {
  double area2 = std::abs(cross(b - a, c - a));
  double scale = std::max({(b - a).norm(), (c - a).norm(), 1e-12});
  return area2 < 1e-9 * scale * scale;
}

}  // namespace

Homography estimate_homography(const std::vector<CalibrationPair>& pairs) {
  size_t n = pairs.size();
  if (n < 4) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "need >= 4 calibration pairs, got " + std::to_string(n));
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if ((pairs[i].pixel - pairs[j].pixel).norm() < 1e-9) {
        throw Error(ErrorCode::DegenerateConfiguration, "duplicate source points");
      }
    }
  }
  if (n == 4) {
    for (size_t i = 0; i < 4; ++i) {
      for (size_t j = i + 1; j < 4; ++j) {
        for (size_t k = j + 1; k < 4; ++k) {
          if (three_collinear(pairs[i].pixel, pairs[j].pixel, pairs[k].pixel)) {
            throw Error(ErrorCode::DegenerateConfiguration, "3 source points collinear");
          }
        }
      }
    }
  }

  std::vector<Vec2> src(n), dst(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].pixel;
    dst[i] = pairs[i].map;
  }
  Eigen::Matrix3d t_src = normalizing_transform(src);
  Eigen::Matrix3d t_dst = normalizing_transform(dst);

  auto apply = [](const Eigen::Matrix3d& t, const Vec2& p) -> Vec2 {
    Eigen::Vector3d v = t * Eigen::Vector3d(p.x, p.y, 1.0);
    return {v.x() / v.z(), v.y() / v.z()};
  };

  Eigen::MatrixXd a(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    Vec2 s = apply(t_src, src[i]);
    Vec2 d = apply(t_dst, dst[i]);
    a.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
    a.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank must be 8: the second-smallest singular value has to be clearly
  // nonzero relative to the largest.
  if (sv(7) < 1e-10 * sv(0)) {
    throw Error(ErrorCode::RankDeficient, "DLT system rank-deficient");
  }
  Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2),
        h(3), h(4), h(5),
        h(6), h(7), h(8);

  Eigen::Matrix3d full = t_dst.inverse() * hn * t_src;
  return Homography(full);
}

double max_reprojection_error(const Homography& h, const std::vector<CalibrationPair>& pairs) {
  double worst = 0.0;
  for (const CalibrationPair& p : pairs) {
    worst = std::max(worst, (h.project(p.pixel) - p.map).norm());
  }
  return worst;
}

}  // namespace ecr
