#include "ecr/kalman.hpp"

namespace ecr {

BoxKalmanFilter::BoxKalmanFilter() {
  f_ = Eigen::Matrix<double, 7, 7>::Identity();
  f_(0, 4) = 1.0;
  f_(1, 5) = 1.0;
  f_(2, 6) = 1.0;

  h_ = Eigen::Matrix<double, 4, 7>::Zero();
  h_(0, 0) = h_(1, 1) = h_(2, 2) = h_(3, 3) = 1.0;

  // Reference noise profile for the SORT family of box filters.
  r_ = Eigen::Matrix4d::Identity();
  r_(2, 2) = 10.0;
  r_(3, 3) = 10.0;

  q_ = Eigen::Matrix<double, 7, 7>::Identity();
  q_(4, 4) = q_(5, 5) = 0.01;
  q_(6, 6) = 0.0001;

  p_ = Cov::Identity() * 10.0;
  p_.block<3, 3>(4, 4) *= 1000.0;
}

BoxKalmanFilter::BoxKalmanFilter(const Meas& z0) : BoxKalmanFilter() {
  x_.head<4>() = z0;
}

void BoxKalmanFilter::predict() {
  // Area must stay positive; freeze its velocity when it would collapse.
  if (x_(2) + x_(6) <= 0.0) x_(6) = 0.0;
  x_ = f_ * x_;
  if (x_(2) < 1.0) x_(2) = 1.0;
  p_ = f_ * p_ * f_.transpose() + q_;
}

void BoxKalmanFilter::update(const Meas& z) {
  Eigen::Vector4d innovation = z - h_ * x_;
  Eigen::Matrix4d s = h_ * p_ * h_.transpose() + r_;
  Eigen::Matrix<double, 7, 4> k = p_ * h_.transpose() * s.inverse();
  x_ += k * innovation;
  p_ = (Cov::Identity() - k * h_) * p_;
}

PointKalmanFilter::PointKalmanFilter(double q, double r) {
  f_ = Eigen::Matrix4d::Identity();
  f_(0, 2) = 1.0;
  f_(1, 3) = 1.0;

  h_ = Eigen::Matrix<double, 2, 4>::Zero();
  h_(0, 0) = h_(1, 1) = 1.0;

  // Discrete white-acceleration model with dt = 1.
  q_ = Eigen::Matrix4d::Zero();
  q_(0, 0) = q_(1, 1) = q * 0.25;
  q_(2, 2) = q_(3, 3) = q;
  q_(0, 2) = q_(2, 0) = q * 0.5;
  q_(1, 3) = q_(3, 1) = q * 0.5;

  r_ = Eigen::Matrix2d::Identity() * r;
}

void PointKalmanFilter::init(const Eigen::Vector2d& z0) {
  x_.setZero();
  x_.head<2>() = z0;
  p_ = Cov::Identity();
  p_(0, 0) = p_(1, 1) = r_(0, 0);
  p_(2, 2) = p_(3, 3) = 1000.0;
  initialized_ = true;
}

void PointKalmanFilter::predict() {
  x_ = f_ * x_;
  p_ = f_ * p_ * f_.transpose() + q_;
}

void PointKalmanFilter::update(const Eigen::Vector2d& z) {
  if (!initialized_) {
    init(z);
    return;
  }
  Eigen::Vector2d innovation = z - h_ * x_;
  Eigen::Matrix2d s = h_ * p_ * h_.transpose() + r_;
  Eigen::Matrix<double, 4, 2> k = p_ * h_.transpose() * s.inverse();
  x_ += k * innovation;
  p_ = (Cov::Identity() - k * h_) * p_;
}

}  // namespace ecr
