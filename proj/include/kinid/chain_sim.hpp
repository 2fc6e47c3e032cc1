#pragma once

// Ground-truth simulator: serial chains in Denavit-Hartenberg form with one
// marker rigidly attached to every link, observed by a fixed camera.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kinid/errors.hpp"
#include "kinid/se3.hpp"

namespace kinid {

inline const std::string kCameraFrame = "camera";

enum class JointType { Prismatic = 0, Revolute = 1 };

inline const char* to_string(JointType t) {
  return t == JointType::Prismatic ? "prismatic" : "revolute";
}

/// One joint in DH form. The driving signal is added to `theta0` (revolute)
/// or `d0` (prismatic).
struct DhJoint {
  JointType type = JointType::Revolute;
  double theta0 = 0.0;
  double d0 = 0.0;
  double a = 0.0;
  double alpha = 0.0;

  Pose transform(double signal) const {
    const bool rev = type == JointType::Revolute;
    return dh_link_transform(theta0 + (rev ? signal : 0.0), d0 + (rev ? 0.0 : signal), a, alpha);
  }
};

/// Constant pose of a marker in the frame of the link it sits on.
struct MarkerAttachment {
  int link = 0;
  Pose offset;
};

/// Ground-truth open chain with n links (0-based, link 0 is the base).
/// `joints[j]` connects link j to link j+1 and is driven by signal
/// `joint_signal[j]`. `attachments[i]` places marker i.
struct ChainSpec {
  std::vector<DhJoint> joints;
  std::vector<MarkerAttachment> attachments;
  std::vector<int> joint_signal;
  Pose camera_pose = Pose::identity(kCameraFrame);

  int n_links() const { return static_cast<int>(attachments.size()); }
  int n_signals() const { return static_cast<int>(joints.size()); }

  int link_of_marker(int marker) const { return attachments.at(marker).link; }

  int marker_on_link(int link) const {
    for (int i = 0; i < n_links(); ++i)
      if (attachments[i].link == link) return i;
    throw IndexOutOfRange("no marker on link " + std::to_string(link));
  }

  /// Joint position driven by `signal`.
  int joint_of_signal(int signal) const {
    for (int j = 0; j < n_signals(); ++j)
      if (joint_signal[j] == signal) return j;
    throw IndexOutOfRange("signal " + std::to_string(signal) + " drives no joint");
  }

  bool signal_is_revolute(int signal) const {
    return joints[joint_of_signal(signal)].type == JointType::Revolute;
  }

  void validate() const {
    const int n = n_links();
    if (n < 2) throw InvariantViolation("chain needs at least 2 links");
    if (n_signals() != n - 1 || static_cast<int>(joint_signal.size()) != n - 1)
      throw InvariantViolation("chain with " + std::to_string(n) + " links needs " +
                               std::to_string(n - 1) + " joints and signals");
    auto is_bijection = [](std::vector<int> v) {
      std::sort(v.begin(), v.end());
      for (int i = 0; i < static_cast<int>(v.size()); ++i)
        if (v[i] != i) return false;
      return true;
    };
    std::vector<int> links;
    for (const auto& att : attachments) {
      if (!Rotation::is_proper(att.offset.orientation.matrix()))
        throw InvariantViolation("marker offset orientation is not a proper rotation");
      links.push_back(att.link);
    }
    if (!is_bijection(links)) throw InvariantViolation("attachments must cover every link once");
    if (!is_bijection(joint_signal))
      throw InvariantViolation("joint_signal must be a permutation of 0..n-2");
    for (const auto& j : joints)
      if (!std::isfinite(j.theta0) || !std::isfinite(j.d0) || !std::isfinite(j.a) ||
          !std::isfinite(j.alpha) || std::abs(j.alpha) > kPi)
        throw InvariantViolation("DH parameters must be finite with |alpha| <= pi");
  }
};

/// Marker poses in the camera frame for joint vector `q` (indexed by signal).
inline std::vector<Pose> forward_markers(const ChainSpec& chain, const Eigen::VectorXd& q) {
  const int n = chain.n_links();
  if (q.size() != n - 1)
    throw DimensionMismatch("joint vector has " + std::to_string(q.size()) + " entries, expected " +
                            std::to_string(n - 1));
  std::vector<Pose> links;
  links.reserve(n);
  links.push_back(chain.camera_pose);
  for (int j = 0; j + 1 < n; ++j)
    links.push_back(compose(links.back(), chain.joints[j].transform(q(chain.joint_signal[j]))));
  std::vector<Pose> markers;
  markers.reserve(n);
  for (const auto& att : chain.attachments) markers.push_back(compose(links.at(att.link), att.offset));
  return markers;
}

/// Joint-space trajectory: row t holds q(t), one column per signal.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd q;

  int size() const { return static_cast<int>(q.rows()); }
  int n_signals() const { return static_cast<int>(q.cols()); }
};

/// Time series of marker poses (camera frame) with the matching joint vectors.
struct ObservationSet {
  std::vector<double> times;
  std::vector<std::vector<Pose>> marker_poses;  // [t][marker]
  Eigen::MatrixXd joint_values;                 // T x (n-1)

  int size() const { return static_cast<int>(marker_poses.size()); }
  int n_markers() const { return marker_poses.empty() ? 0 : static_cast<int>(marker_poses[0].size()); }
  int n_signals() const { return static_cast<int>(joint_values.cols()); }

  void validate() const {
    const int t = size();
    if (t < 1) throw InvariantViolation("observation set is empty");
    if (static_cast<int>(times.size()) != t || joint_values.rows() != t)
      throw DimensionMismatch("times, poses and joint values disagree on the observation count");
    const int n = n_markers();
    if (n < 2) throw DimensionMismatch("at least 2 markers required");
    if (joint_values.cols() != n - 1)
      throw DimensionMismatch("expected " + std::to_string(n - 1) + " joint signals for " +
                              std::to_string(n) + " markers");
    for (const auto& row : marker_poses) {
      if (static_cast<int>(row.size()) != n) throw DimensionMismatch("inconsistent marker count");
      for (const auto& p : row)
        if (!Rotation::is_proper(p.orientation.matrix(), 1e-9) || !p.position.allFinite())
          throw InvariantViolation("marker pose is not a finite proper rigid transform");
    }
  }
};

inline ObservationSet observe(const ChainSpec& chain, const Trajectory& traj) {
  if (traj.n_signals() != chain.n_links() - 1)
    throw DimensionMismatch("trajectory has " + std::to_string(traj.n_signals()) +
                            " columns, chain has " + std::to_string(chain.n_links() - 1) + " signals");
  if (static_cast<int>(traj.times.size()) != traj.size())
    throw DimensionMismatch("trajectory times and rows disagree");
  ObservationSet x;
  x.times = traj.times;
  x.joint_values = traj.q;
  x.marker_poses.reserve(traj.size());
  for (int t = 0; t < traj.size(); ++t)
    x.marker_poses.push_back(forward_markers(chain, traj.q.row(t).transpose()));
  return x;
}

struct SinusoidConfig {
  double amplitude_min = 0.2;
  double amplitude_max = 1.0;
  double frequency_min = 0.1;  // Hz
  double frequency_max = 1.0;
  double sample_rate = 10.0;  // Hz
};

struct SinusoidParams {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  double operator()(double t) const { return amplitude * std::sin(2.0 * kPi * frequency * t + phase); }
};

/// Per-signal amplitude, frequency and phase drawn from the configured ranges.
inline std::vector<SinusoidParams> sinusoid_params(int n_signals, const SinusoidConfig& cfg,
                                                   std::uint64_t seed) {
  if (cfg.amplitude_min > cfg.amplitude_max || cfg.frequency_min > cfg.frequency_max ||
      cfg.amplitude_min < 0.0 || cfg.frequency_min < 0.0 || !(cfg.sample_rate > 0.0))
    throw InvalidRange("sinusoid ranges must be non-empty and non-negative");
  std::mt19937_64 rng(seed);
  auto draw = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  std::vector<SinusoidParams> out(n_signals);
  for (auto& p : out) {
    p.amplitude = draw(cfg.amplitude_min, cfg.amplitude_max);
    p.frequency = draw(cfg.frequency_min, cfg.frequency_max);
    p.phase = draw(0.0, 2.0 * kPi);
  }
  return out;
}

inline Trajectory gen_sinusoidal(int n_signals, int samples, const SinusoidConfig& cfg,
                                 std::uint64_t seed) {
  if (samples < 1) throw InvalidRange("trajectory needs at least one sample");
  if (n_signals < 1) throw InvalidRange("trajectory needs at least one signal");
  const auto params = sinusoid_params(n_signals, cfg, seed);
  Trajectory traj;
  traj.q.resize(samples, n_signals);
  for (int i = 0; i < samples; ++i) {
    const double t = i / cfg.sample_rate;
    traj.times.push_back(t);
    for (int k = 0; k < n_signals; ++k) traj.q(i, k) = params[k](t);
  }
  return traj;
}

/// Excitation set in which every signal moves once while the others rest.
struct FullyInformativeTrajectory {
  Trajectory trajectory;
  std::vector<std::pair<int, int>> pairs;  // rows (t1, t2) belonging to signal k
};

/// Two rows per signal: the rest pose, and the rest pose with signal k
/// displaced by `displacement[k]`. Yields 2(n-1) rows.
inline FullyInformativeTrajectory gen_fully_informative(const Eigen::VectorXd& rest,
                                                        const Eigen::VectorXd& displacement) {
  const int m = static_cast<int>(rest.size());
  if (m < 1) throw InvalidRange("at least one signal required");
  if (displacement.size() != m) throw DimensionMismatch("rest pose and displacement sizes differ");
  FullyInformativeTrajectory out;
  out.trajectory.q.resize(2 * m, m);
  for (int k = 0; k < m; ++k) {
    if (std::abs(wrap_pi(displacement(k))) < 1e-9) throw DegenerateDisplacement(k);
    out.trajectory.q.row(2 * k) = rest.transpose();
    out.trajectory.q.row(2 * k + 1) = rest.transpose();
    out.trajectory.q(2 * k + 1, k) += displacement(k);
    out.pairs.emplace_back(2 * k, 2 * k + 1);
  }
  for (int r = 0; r < 2 * m; ++r) out.trajectory.times.push_back(r);
  return out;
}

inline FullyInformativeTrajectory gen_fully_informative(int n_signals, double displacement = 0.5) {
  return gen_fully_informative(Eigen::VectorXd::Zero(n_signals),
                               Eigen::VectorXd::Constant(n_signals, displacement));
}

/// Drops rows that repeat an earlier row. Columns flagged in `periodic` are
/// compared modulo 2*pi; an empty mask treats every column as periodic.
inline Trajectory dedup_mod2pi(const Trajectory& traj, const std::vector<bool>& periodic = {},
                               double tol = 1e-9) {
  const int cols = traj.n_signals();
  if (!periodic.empty() && static_cast<int>(periodic.size()) != cols)
    throw DimensionMismatch("periodic mask size does not match trajectory columns");
  auto same = [&](int a, int b) {
    for (int c = 0; c < cols; ++c) {
      const double d = traj.q(a, c) - traj.q(b, c);
      const bool wrap = periodic.empty() || periodic[c];
      if (std::abs(wrap ? wrap_pi(d) : d) >= tol) return false;
    }
    return true;
  };
  std::vector<int> keep;
  for (int r = 0; r < traj.size(); ++r) {
    bool dup = false;
    for (int k : keep)
      if (same(k, r)) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(r);
  }
  Trajectory out;
  out.q.resize(static_cast<Eigen::Index>(keep.size()), cols);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.q.row(static_cast<Eigen::Index>(i)) = traj.q.row(keep[i]);
    if (!traj.times.empty()) out.times.push_back(traj.times[keep[i]]);
  }
  return out;
}

struct TypePolicy {
  enum class Kind { Random, AllRevolute, AllPrismatic, Fixed };
  Kind kind = Kind::Random;
  std::vector<JointType> fixed;

  static TypePolicy random() { return {}; }
  static TypePolicy all_revolute() { return {Kind::AllRevolute, {}}; }
  static TypePolicy all_prismatic() { return {Kind::AllPrismatic, {}}; }
  static TypePolicy list(std::vector<JointType> types) { return {Kind::Fixed, std::move(types)}; }
};

/// Haar-uniform rotation from a normalized Gaussian quaternion.
template <typename Rng>
Rotation random_rotation(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng));
  } while (q.norm() < 1e-6);
  return Rotation::from_quaternion(q);
}

template <typename Rng>
std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = std::uniform_int_distribution<int>(0, i)(rng);
    std::swap(p[i], p[j]);
  }
  return p;
}

/// Random chain: DH lengths in [0.1, 1] m, DH angles in (-pi, pi], random
/// marker offsets, random marker and signal permutations.
inline ChainSpec random_chain(std::uint64_t seed, int n, const TypePolicy& policy = {}) {
  if (n < 2) throw InvalidRange("chain needs at least 2 links");
  if (policy.kind == TypePolicy::Kind::Fixed && static_cast<int>(policy.fixed.size()) != n - 1)
    throw DimensionMismatch("fixed type list must have n-1 entries");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> length(0.1, 1.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  std::bernoulli_distribution coin(0.5);
  auto wrap_open = [](double a) { return a == -kPi ? kPi : a; };

  ChainSpec chain;
  for (int j = 0; j + 1 < n; ++j) {
    DhJoint joint;
    switch (policy.kind) {
      case TypePolicy::Kind::Random:
        joint.type = coin(rng) ? JointType::Revolute : JointType::Prismatic;
        break;
      case TypePolicy::Kind::AllRevolute:
        joint.type = JointType::Revolute;
        break;
      case TypePolicy::Kind::AllPrismatic:
        joint.type = JointType::Prismatic;
        break;
      case TypePolicy::Kind::Fixed:
        joint.type = policy.fixed[j];
        break;
    }
    joint.theta0 = wrap_open(angle(rng));
    joint.d0 = length(rng);
    joint.a = length(rng);
    joint.alpha = wrap_open(angle(rng));
    chain.joints.push_back(joint);
  }
  const auto marker_links = random_permutation(n, rng);
  for (int i = 0; i < n; ++i) {
    MarkerAttachment att;
    att.link = marker_links[i];
    att.offset.position = Vec3(offset(rng), offset(rng), offset(rng));
    att.offset.orientation = random_rotation(rng);
    chain.attachments.push_back(att);
  }
  chain.joint_signal = random_permutation(n - 1, rng);
  return chain;
}

}  // namespace kinid
