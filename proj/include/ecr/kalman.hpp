#pragma once

#include <Eigen/Dense>

namespace ecr {

// Constant-velocity box filter over [cx, cy, area, aspect, vcx, vcy, varea].
// Aspect carries no velocity and is held constant through prediction.
class BoxKalmanFilter {
 public:
  using State = Eigen::Matrix<double, 7, 1>;
  using Cov = Eigen::Matrix<double, 7, 7>;
  using Meas = Eigen::Vector4d;

  BoxKalmanFilter();
  explicit BoxKalmanFilter(const Meas& z0);

  void predict();
  void update(const Meas& z);

  const State& state() const { return x_; }
  const Cov& covariance() const { return p_; }
  Meas measurement_view() const { return x_.head<4>(); }

 private:
  State x_ = State::Zero();
  Cov p_ = Cov::Identity();
  Eigen::Matrix<double, 7, 7> f_;
  Eigen::Matrix<double, 4, 7> h_;
  Eigen::Matrix<double, 7, 7> q_;
  Eigen::Matrix4d r_;
};

// Constant-velocity point filter over [x, y, vx, vy] with discrete
// white-acceleration process noise.
class PointKalmanFilter {
 public:
  using State = Eigen::Vector4d;
  using Cov = Eigen::Matrix4d;

  // q: process noise intensity (px^2/frame^2), r: measurement noise (px^2).
  PointKalmanFilter(double q, double r);

  void init(const Eigen::Vector2d& z0);
  void predict();
  void update(const Eigen::Vector2d& z);

  bool initialized() const { return initialized_; }
  Eigen::Vector2d position() const { return x_.head<2>(); }
  Eigen::Vector2d velocity() const { return x_.tail<2>(); }

 private:
  State x_ = State::Zero();
  Cov p_ = Cov::Identity();
  Eigen::Matrix4d f_;
  Eigen::Matrix<double, 2, 4> h_;
  Eigen::Matrix4d q_;
  Eigen::Matrix2d r_;
  bool initialized_ = false;
};

}  // namespace ecr
