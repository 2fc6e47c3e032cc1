#pragma once

// Rotation and rigid-pose algebra used by the simulator and the feasibility
// tests. Rotations are kept as 3x3 matrices throughout.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "kinid/errors.hpp"

namespace kinid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_pi(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

/// Proper rotation matrix. Construction through `from_matrix` validates
/// orthonormality; the named factories produce valid rotations by design.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  static Rotation from_matrix(const Mat3& m, double tol = 1e-10) {
    if (!is_proper(m, tol)) throw InvariantViolation("matrix is not a proper rotation");
    return Rotation(m, Unchecked{});
  }

  /// Projects an almost-orthonormal matrix onto SO(3) (nearest in Frobenius norm).
  static Rotation project(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
    return Rotation(svd.matrixU() * d * svd.matrixV().transpose(), Unchecked{});
  }

  static Rotation from_quaternion(const Eigen::Quaterniond& q) {
    return Rotation(q.normalized().toRotationMatrix(), Unchecked{});
  }

  /// Rotation by |w| radians about w/|w|.
  static Rotation exp(const Vec3& w) {
    const double angle = w.norm();
    if (angle < 1e-300) return Rotation();
    return Rotation(Eigen::AngleAxisd(angle, w / angle).toRotationMatrix(), Unchecked{});
  }

  static bool is_proper(const Mat3& m, double tol = 1e-10) {
    if (!m.allFinite()) return false;
    const Mat3 e = m * m.transpose() - Mat3::Identity();
    return e.cwiseAbs().maxCoeff() < tol && std::abs(m.determinant() - 1.0) < tol;
  }

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation inverse() const { return transpose(); }

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(m_).normalized(); }

  /// Third column: the rotated z axis.
  Vec3 z_axis() const { return m_.col(2); }

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    return Rotation(a.m_ * b.m_, Unchecked{});
  }
  friend Vec3 operator*(const Rotation& r, const Vec3& v) { return r.m_ * v; }

 private:
  struct Unchecked {};
  Rotation(Mat3 m, Unchecked) : m_(std::move(m)) {}

  Mat3 m_;
};

/// Largest absolute entrywise difference.
inline double max_abs_diff(const Rotation& a, const Rotation& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

inline Rotation rot_x(double angle) {
  return Rotation::exp(Vec3::UnitX() * angle);
}
inline Rotation rot_y(double angle) {
  return Rotation::exp(Vec3::UnitY() * angle);
}
inline Rotation rot_z(double angle) {
  return Rotation::exp(Vec3::UnitZ() * angle);
}

/// Yaw about z, pitch about y, roll about x; R = Rz(yaw) Ry(pitch) Rx(roll).
struct YprAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

inline Rotation ypr_to_rot(const YprAngles& a) {
  return rot_z(a.yaw) * rot_y(a.pitch) * rot_x(a.roll);
}

/// Inverse of `ypr_to_rot` in canonical form. Throws GimbalLock when the
/// pitch is within 1e-9 (in sine) of +-pi/2.
inline YprAngles rot_to_ypr(const Rotation& r) {
  const Mat3& m = r.matrix();
  if (std::abs(m(2, 0)) > 1.0 - 1e-9) throw GimbalLock();
  YprAngles a;
  a.pitch = std::atan2(-m(2, 0), std::hypot(m(0, 0), m(1, 0)));
  a.yaw = wrap_pi(std::atan2(m(1, 0), m(0, 0)));
  a.roll = wrap_pi(std::atan2(m(2, 1), m(2, 2)));
  return a;
}

/// Angle in [0, pi] of the rotation, consistent with trace(R) = 1 + 2 cos(angle).
inline double rotation_angle(const Rotation& r) {
  const Mat3& m = r.matrix();
  const Vec3 skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::atan2(skew.norm() / 2.0, c);
}

/// Rigid pose expressed in `frame`. An empty frame name denotes an anonymous
/// local frame (results of inversion and relative-pose computations).
struct Pose {
  Vec3 position = Vec3::Zero();
  Rotation orientation;
  std::string frame;

  static Pose identity(std::string frame = {}) {
    return Pose{Vec3::Zero(), Rotation::identity(), std::move(frame)};
  }
  static Pose translation(const Vec3& v) { return Pose{v, Rotation::identity(), {}}; }
  static Pose rotation(const Rotation& r) { return Pose{Vec3::Zero(), r, {}}; }

  Vec3 apply(const Vec3& v) const { return orientation * v + position; }
};

/// a ∘ b: `b` is expressed in the body frame of `a`; the result keeps a's frame.
inline Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.orientation * b.position + a.position, a.orientation * b.orientation, a.frame};
}

inline Pose invert(const Pose& p) {
  const Rotation rt = p.orientation.transpose();
  return Pose{-(rt * p.position), rt, {}};
}

/// Pose of `b` in the body frame of `a`; both must be expressed in the same frame.
inline Pose relative_pose(const Pose& a, const Pose& b) {
  if (a.frame != b.frame) throw FrameMismatch(a.frame, b.frame);
  const Rotation rt = a.orientation.transpose();
  return Pose{rt * (b.position - a.position), rt * b.orientation, {}};
}

/// Link-to-link transform in Denavit-Hartenberg form:
/// orientation Rz(theta) Rx(alpha), position (0,0,d) + Rz(theta) (a,0,0).
inline Pose dh_link_transform(double theta, double d, double a, double alpha) {
  const Rotation rz = rot_z(theta);
  return Pose{Vec3(0, 0, d) + rz * Vec3(a, 0, 0), rz * rot_x(alpha), {}};
}

inline double max_abs_diff(const Pose& a, const Pose& b) {
  return std::max((a.position - b.position).cwiseAbs().maxCoeff(),
                  max_abs_diff(a.orientation, b.orientation));
}

}  // namespace kinid
