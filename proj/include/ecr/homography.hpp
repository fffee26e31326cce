#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ecr/geometry.hpp"

namespace ecr {

struct CalibrationPair {
  Vec2 pixel;
  Vec2 map;
};

// 3x3 projective map, stored normalized so matrix(2,2) == 1.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }

  // Applies the map with perspective division. Throws PointAtInfinity when
  // the homogeneous third coordinate vanishes (|w| <= 1e-12).
  Vec2 project(const Vec2& p) const;

  Homography inverse() const;

  double determinant() const { return m_.determinant(); }

 private:
  Eigen::Matrix3d m_;
};

// Least-squares DLT with Hartley coordinate normalization. Requires >= 4
// pairs with no 3 of the defining source points collinear; throws
// DegenerateConfiguration / RankDeficient otherwise.
Homography estimate_homography(const std::vector<CalibrationPair>& pairs);

// Max distance, in map units, between pair.map and H(pair.pixel).
double max_reprojection_error(const Homography& h, const std::vector<CalibrationPair>& pairs);

}  // namespace ecr
