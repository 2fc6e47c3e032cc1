#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "kinid/se3.hpp"

namespace kinid::testing {

// Elementary rotations written out entry by entry, independent of the library.
inline Mat3 hand_rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}
inline Mat3 hand_ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Mat3 hand_rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

/// Homogeneous 4x4 from a pose.
inline Eigen::Matrix4d homogeneous(const Pose& p) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = p.orientation.matrix();
  h.topRightCorner<3, 1>() = p.position;
  return h;
}

inline Eigen::Matrix4d homogeneous(const Mat3& r, const Vec3& t) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = r;
  h.topRightCorner<3, 1>() = t;
  return h;
}

/// DH link transform as Rz(theta) Tz(d) Tx(a) Rx(alpha), built from 4x4 factors.
inline Eigen::Matrix4d hand_dh(double theta, double d, double a, double alpha) {
  return homogeneous(hand_rz(theta), Vec3::Zero()) * homogeneous(Mat3::Identity(), Vec3(0, 0, d)) *
         homogeneous(Mat3::Identity(), Vec3(a, 0, 0)) * homogeneous(hand_rx(alpha), Vec3::Zero());
}

inline Rotation random_rot(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Rotation::from_quaternion(Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)));
}

inline Pose random_pose(std::mt19937_64& rng, std::string frame = {}) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return Pose{Vec3(u(rng), u(rng), u(rng)), random_rot(rng), std::move(frame)};
}

}  // namespace kinid::testing
