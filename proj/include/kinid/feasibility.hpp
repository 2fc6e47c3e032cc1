#pragma once

// Feasibility tests on the relative motion of a marker pair against one joint
// signal:
//
//   prismatic          l(t) = l* + q(t) z,        |z| = 1,  R(t) constant
//   revolute, linear   l(t) = b1 + R(t) b2
//   revolute, angular  R(t) = RA Rz(q(t)) RB,     RA, RB in SO(3)
//
// where (l(t), R(t)) is the pose of the second marker in the frame of the
// first. The first two are linear least-squares problems; the third is solved
// by Levenberg-Marquardt on SO(3) x SO(3) with deterministic restarts.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kinid/chain_sim.hpp"
#include "kinid/errors.hpp"
#include "kinid/se3.hpp"

namespace kinid {

struct Tolerances {
  double tol_res = 1e-6;        ///< RMS equation residual
  double tol_con = 1e-6;        ///< unit-norm constraint violation
  double tol_const_rot = 1e-8;  ///< entrywise relative-rotation drift
  double rank_rel_tol = 1e-8;   ///< singular values below this x sigma_max are dropped
  int multistart_count = 8;
  int max_iterations = 200;
  std::uint64_t restart_seed = 0x6b696e6964ULL;

  void validate() const {
    if (!(tol_res > 0 && tol_con > 0 && tol_const_rot > 0 && rank_rel_tol > 0) ||
        multistart_count < 1 || max_iterations < 1)
      throw InvalidRange("tolerances must be positive");
  }
};

enum class Outcome { Feasible, Infeasible, Inconclusive };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Feasible:
      return "feasible";
    case Outcome::Infeasible:
      return "infeasible";
    case Outcome::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct TestResult {
  Outcome outcome = Outcome::Inconclusive;
  double residual = std::numeric_limits<double>::infinity();  ///< RMS over all scalar equations
  double constraint_violation = 0.0;
  /// Prismatic test only: max entrywise drift of R(t) from R(t0).
  double rotation_drift = 0.0;
  /// Linear tests: (l*, z) or (b1, b2). Angular test: empty.
  Eigen::VectorXd solution;
  /// Angular test: (RA, RB) of the best restart.
  std::optional<std::pair<Rotation, Rotation>> rotations;
  int rank = 0;
  int iterations = 0;
  std::string note;

  bool feasible() const { return outcome == Outcome::Feasible; }
  bool inconclusive() const { return outcome == Outcome::Inconclusive; }
};

/// Pose of marker i2 in the frame of marker i1 over time, with signal q_k.
struct RelativeSeries {
  std::vector<Vec3> positions;
  std::vector<Rotation> orientations;
  Eigen::VectorXd signal;

  int size() const { return static_cast<int>(positions.size()); }
};

inline RelativeSeries relative_series(const ObservationSet& x, int i1, int i2, int k) {
  const int n = x.n_markers();
  if (i1 == i2) throw IndexOutOfRange("marker pair must be two distinct markers");
  if (i1 < 0 || i2 < 0 || i1 >= n || i2 >= n)
    throw IndexOutOfRange("marker index out of range [0, " + std::to_string(n) + ")");
  if (k < 0 || k >= x.n_signals())
    throw IndexOutOfRange("signal index out of range [0, " + std::to_string(x.n_signals()) + ")");
  RelativeSeries s;
  s.positions.reserve(x.size());
  s.orientations.reserve(x.size());
  for (const auto& row : x.marker_poses) {
    const Pose rel = relative_pose(row[i1], row[i2]);
    s.positions.push_back(rel.position);
    s.orientations.push_back(rel.orientation);
  }
  s.signal = x.joint_values.col(k);
  return s;
}

namespace detail {

inline void require_two(const RelativeSeries& s) {
  if (s.size() < 2) throw InsufficientObservations(static_cast<std::size_t>(s.size()));
}

inline double rotation_drift(const RelativeSeries& s) {
  double d = 0.0;
  for (const auto& r : s.orientations) d = std::max(d, max_abs_diff(r, s.orientations.front()));
  return d;
}

inline Eigen::VectorXd stacked_positions(const RelativeSeries& s) {
  Eigen::VectorXd y(3 * s.size());
  for (int t = 0; t < s.size(); ++t) y.segment<3>(3 * t) = s.positions[t];
  return y;
}

inline double rms(const Eigen::VectorXd& r) {
  return r.size() == 0 ? 0.0 : r.norm() / std::sqrt(static_cast<double>(r.size()));
}

}  // namespace detail

inline int numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

/// Stacked blocks [I3, q(t) I3]: the 3T x 6 prismatic coefficient matrix.
inline Eigen::MatrixXd prismatic_system(const RelativeSeries& s) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * s.size(), 6);
  for (int t = 0; t < s.size(); ++t) {
    a.block<3, 3>(3 * t, 0).setIdentity();
    a.block<3, 3>(3 * t, 3) = s.signal(t) * Mat3::Identity();
  }
  return a;
}

/// Stacked blocks [I3, R(t)]: the 3T x 6 revolute coefficient matrix.
inline Eigen::MatrixXd revolute_linear_system(const RelativeSeries& s) {
  Eigen::MatrixXd a(3 * s.size(), 6);
  for (int t = 0; t < s.size(); ++t) {
    a.block<3, 3>(3 * t, 0).setIdentity();
    a.block<3, 3>(3 * t, 3) = s.orientations[t].matrix();
  }
  return a;
}

inline bool rotation_constancy(const RelativeSeries& s, double tol) {
  detail::require_two(s);
  return detail::rotation_drift(s) < tol;
}

inline TestResult prismatic_test(const RelativeSeries& s, const Tolerances& tol = {}) {
  detail::require_two(s);
  TestResult res;
  res.rotation_drift = detail::rotation_drift(s);
  const Eigen::MatrixXd a = prismatic_system(s);
  const Eigen::VectorXd y = detail::stacked_positions(s);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol.rank_rel_tol);
  res.rank = static_cast<int>(svd.rank());
  if (res.rank == 6) {
    res.solution = svd.solve(y);
    res.residual = detail::rms(a * res.solution - y);
    res.constraint_violation = std::abs(res.solution.tail<3>().norm() - 1.0);
  }

  if (res.rotation_drift >= tol.tol_const_rot) {
    res.outcome = Outcome::Infeasible;
    res.note = "relative orientation not constant";
  } else if (res.rank < 6) {
    res.outcome = Outcome::Inconclusive;
    res.note = "rank " + std::to_string(res.rank) + " < 6: signal does not vary";
  } else {
    res.outcome = res.residual < tol.tol_res && res.constraint_violation < tol.tol_con
                      ? Outcome::Feasible
                      : Outcome::Infeasible;
  }
  return res;
}

inline TestResult revolute_linear_test(const RelativeSeries& s, const Tolerances& tol = {}) {
  detail::require_two(s);
  TestResult res;
  const Eigen::MatrixXd a = revolute_linear_system(s);
  const Eigen::VectorXd y = detail::stacked_positions(s);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(tol.rank_rel_tol);
  res.rank = static_cast<int>(cod.rank());
  res.solution = cod.solve(y);
  res.residual = detail::rms(a * res.solution - y);
  res.outcome = res.residual < tol.tol_res ? Outcome::Feasible : Outcome::Infeasible;
  return res;
}

namespace detail {

// Generators of so(3): hat(e_i).
inline const std::array<Mat3, 3>& so3_generators() {
  static const std::array<Mat3, 3> g = [] {
    std::array<Mat3, 3> out;
    out[0] << 0, 0, 0, 0, 0, -1, 0, 1, 0;
    out[1] << 0, 0, 1, 0, 0, 0, -1, 0, 0;
    out[2] << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    return out;
  }();
  return g;
}

struct AngularFit {
  Rotation ra, rb;
  double rms = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Sum of squared Frobenius residuals of R(t) - RA Rz(q_t) RB.
inline double angular_cost(const std::vector<Mat3>& data, const std::vector<Mat3>& rz,
                           const Mat3& ra, const Mat3& rb) {
  double c = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) c += (ra * rz[t] * rb - data[t]).squaredNorm();
  return c;
}

// Damped Newton on the pullback of 0.5 * cost through the charts
// RA exp(wA), RB exp(wB). The Hessian includes the second-order residual
// terms, which keeps convergence quadratic on large-residual (infeasible) data.
inline AngularFit fit_angular(const std::vector<Mat3>& data, const std::vector<Mat3>& rz,
                              Rotation ra, Rotation rb, const Tolerances& tol) {
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  const auto& gen = so3_generators();
  std::array<std::array<Mat3, 3>, 3> gsym;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) gsym[i][j] = 0.5 * (gen[i] * gen[j] + gen[j] * gen[i]);

  const double n_eq = 9.0 * static_cast<double>(data.size());
  AngularFit fit;
  double cost = angular_cost(data, rz, ra.matrix(), rb.matrix());
  double lambda = 1e-6;
  int it = 0;
  bool stationary = false;
  for (; it < tol.max_iterations; ++it) {
    Mat6 hess = Mat6::Zero();
    Vec6 grad = Vec6::Zero();
    const Mat3& a = ra.matrix();
    for (std::size_t t = 0; t < data.size(); ++t) {
      const Mat3 p = rz[t] * rb.matrix();
      const Mat3 ap = a * p;
      const Mat3 e = ap - data[t];
      // e^T-weighted contractions: <e, A X P> = <A^T e P^T, X>, <e, A P X> = <(AP)^T e, X>.
      const Mat3 left = a.transpose() * e * p.transpose();
      const Mat3 right = ap.transpose() * e;
      std::array<Mat3, 6> j;
      for (int i = 0; i < 3; ++i) {
        j[i] = a * gen[i] * p;
        j[3 + i] = ap * gen[i];
      }
      for (int r = 0; r < 6; ++r) {
        grad(r) += j[r].cwiseProduct(e).sum();
        for (int c = r; c < 6; ++c) hess(r, c) += j[r].cwiseProduct(j[c]).sum();
      }
      for (int r = 0; r < 3; ++r)
        for (int c = r; c < 3; ++c) {
          hess(r, c) += left.cwiseProduct(gsym[r][c]).sum();
          hess(3 + r, 3 + c) += right.cwiseProduct(gsym[r][c]).sum();
        }
      for (int r = 0; r < 3; ++r) {
        const Mat3 w = e.transpose() * a * gen[r] * p;  // <e, A G_r P G_c> = <w^T, G_c>
        for (int c = 0; c < 3; ++c) hess(r, 3 + c) += w.transpose().cwiseProduct(gen[c]).sum();
      }
    }
    hess.triangularView<Eigen::StrictlyLower>() = hess.transpose();
    if (grad.cwiseAbs().maxCoeff() < 1e-10 || std::sqrt(cost / n_eq) < 1e-13) {
      stationary = true;
      break;
    }
    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    bool accepted = false;
    while (!accepted) {
      Mat6 damped = hess;
      damped.diagonal().array() += lambda * scale;
      Eigen::LLT<Mat6> llt(damped);
      if (llt.info() != Eigen::Success) {
        lambda = std::max(lambda * 10.0, 1e-8);
        continue;
      }
      const Vec6 step = llt.solve(-grad);
      const Rotation ra_new = ra * Rotation::exp(step.head<3>());
      const Rotation rb_new = rb * Rotation::exp(step.tail<3>());
      const double new_cost = angular_cost(data, rz, ra_new.matrix(), rb_new.matrix());
      if (new_cost < cost) {
        ra = ra_new;
        rb = rb_new;
        cost = new_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
      } else {
        lambda = std::max(lambda * 10.0, 1e-8);
        if (lambda > 1e12) break;
      }
    }
    // No descent step exists at working precision: numerically stationary.
    if (!accepted) {
      stationary = true;
      break;
    }
  }
  fit.ra = ra;
  fit.rb = rb;
  fit.rms = std::sqrt(cost / n_eq);
  fit.iterations = it;
  fit.converged = stationary || fit.rms < tol.tol_res;
  return fit;
}

}  // namespace detail

inline TestResult revolute_nonlinear_test(const RelativeSeries& s, const Tolerances& tol = {}) {
  detail::require_two(s);
  TestResult res;
  bool varies = false;
  for (int t = 1; t < s.size(); ++t)
    if (std::abs(wrap_pi(s.signal(t) - s.signal(0))) > 1e-9) varies = true;
  if (!varies) {
    res.outcome = Outcome::Inconclusive;
    res.note = "signal constant modulo 2*pi";
    return res;
  }

  std::vector<Mat3> data, rz;
  data.reserve(s.size());
  rz.reserve(s.size());
  for (int t = 0; t < s.size(); ++t) {
    data.push_back(s.orientations[t].matrix());
    rz.push_back(rot_z(s.signal(t)).matrix());
  }

  std::mt19937_64 rng(tol.restart_seed);
  detail::AngularFit best;
  bool any_converged = false;
  for (int r = 0; r < tol.multistart_count; ++r) {
    const Rotation ra0 = random_rotation(rng);
    const Rotation rb0 = random_rotation(rng);
    const auto fit = detail::fit_angular(data, rz, ra0, rb0, tol);
    res.iterations += fit.iterations;
    any_converged = any_converged || fit.converged;
    if (fit.rms < best.rms) best = fit;
    if (best.rms < tol.tol_res) break;
  }
  res.residual = best.rms;
  res.rotations = std::make_pair(best.ra, best.rb);
  res.rank = 0;
  if (best.rms < tol.tol_res) {
    res.outcome = Outcome::Feasible;
  } else if (any_converged) {
    res.outcome = Outcome::Infeasible;
  } else {
    res.outcome = Outcome::Inconclusive;
    res.note = "no restart converged within " + std::to_string(tol.max_iterations) + " iterations";
  }
  return res;
}

/// Independent check of the angular model: for every pair of samples the angle
/// of R(t1) R(t2)^T must equal |wrap(q(t1) - q(t2))|. Used only to cross-check
/// the nonlinear solver.
inline bool revolute_angle_oracle(const RelativeSeries& s, double tol = 1e-7) {
  detail::require_two(s);
  for (int a = 0; a < s.size(); ++a)
    for (int b = a + 1; b < s.size(); ++b) {
      const double angle = rotation_angle(s.orientations[a] * s.orientations[b].transpose());
      const double expected = std::abs(wrap_pi(s.signal(a) - s.signal(b)));
      if (std::abs(angle - expected) >= tol) return false;
    }
  return true;
}

}  // namespace kinid
