#pragma once

// JSON documents for datasets, chains, trajectories, identification results
// and Monte Carlo reports, plus the CSV confusion-matrix table.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "kinid/chain_sim.hpp"
#include "kinid/errors.hpp"
#include "kinid/feasibility.hpp"
#include "kinid/identify.hpp"
#include "kinid/montecarlo.hpp"

namespace kinid {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

class IoError : public Error {
 public:
  using Error::Error;
};

namespace io {

using json = nlohmann::json;

// ---- primitives ----------------------------------------------------------

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json matrix_rows(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return out;
}

/// Unit quaternion (w, x, y, z) with w >= 0.
inline json quaternion(const Rotation& r) {
  Eigen::Quaterniond q = r.quaternion();
  if (q.w() < 0) q.coeffs() *= -1.0;
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

/// Typed field access that reports the JSON path of anything malformed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const std::string& key) const {
    if (!j_.is_object()) throw ParseError(path_, "expected an object");
    if (!j_.contains(key)) throw ParseError(path_ + "." + key, "missing field");
    return Reader(j_.at(key), path_ + "." + key);
  }

  Reader at(std::size_t i) const {
    if (!j_.is_array() || i >= j_.size()) throw ParseError(path_, "index " + std::to_string(i) + " out of range");
    return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t array_size() const {
    if (!j_.is_array()) throw ParseError(path_, "expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) throw ParseError(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) throw ParseError(path_, "non-finite number");
    return v;
  }

  int integer() const {
    if (!j_.is_number_integer()) throw ParseError(path_, "expected an integer");
    return j_.get<int>();
  }

  std::string string() const {
    if (!j_.is_string()) throw ParseError(path_, "expected a string");
    return j_.get<std::string>();
  }

  std::vector<double> numbers(std::size_t expected = 0) const {
    const std::size_t n = array_size();
    if (expected != 0 && n != expected)
      throw ParseError(path_, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(n));
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(at(i).number());
    return out;
  }

  Vec3 vec3() const {
    const auto v = numbers(3);
    return Vec3(v[0], v[1], v[2]);
  }

  Rotation quaternion(double tol = 1e-9) const {
    const auto v = numbers(4);
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (std::abs(norm - 1.0) > tol)
      throw InvariantViolation(path_ + ": quaternion norm " + std::to_string(norm) + " is not 1");
    return Rotation::from_quaternion(Eigen::Quaterniond(v[0], v[1], v[2], v[3]));
  }

  Rotation matrix_rows() const {
    if (array_size() != 3) throw ParseError(path_, "expected 3 rows");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      const auto row = at(static_cast<std::size_t>(r)).numbers(3);
      for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    if (!Rotation::is_proper(m, 1e-9)) throw InvariantViolation(path_ + ": not a proper rotation");
    return Rotation::from_matrix(m, 1e-9);
  }

 private:
  const json& j_;
  std::string path_;
};

inline void check_header(const Reader& doc, const std::string& kind) {
  const int version = doc.at("schema_version").integer();
  if (version != kSchemaVersion) throw SchemaVersionMismatch(version, kSchemaVersion);
  const std::string found = doc.at("kind").string();
  if (found != kind) throw ParseError(doc.path() + ".kind", "expected '" + kind + "', got '" + found + "'");
}

inline json header(const std::string& kind) {
  return json{{"schema_version", kSchemaVersion}, {"kind", kind}, {"tool_version", kToolVersion}};
}

// ---- files ---------------------------------------------------------------

inline json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col), "invalid JSON");
  }
}

inline json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

inline void save(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

// ---- observation sets ----------------------------------------------------

inline json pose_record(const Pose& p) {
  json rec{{"position", vec3(p.position)}, {"quaternion", quaternion(p.orientation)}};
  try {
    const YprAngles a = rot_to_ypr(p.orientation);
    rec["ypr"] = json::array({a.yaw, a.pitch, a.roll});
  } catch (const GimbalLock&) {
  }
  return rec;
}

inline Pose pose_from_record(const Reader& rec) {
  Pose p;
  p.frame = kCameraFrame;
  p.position = rec.at("position").vec3();
  if (rec.has("quaternion")) {
    p.orientation = rec.at("quaternion").quaternion();
  } else if (rec.has("ypr")) {
    const auto a = rec.at("ypr").numbers(3);
    p.orientation = ypr_to_rot({a[0], a[1], a[2]});
  } else {
    throw ParseError(rec.path(), "pose needs 'quaternion' or 'ypr'");
  }
  return p;
}

inline json dataset_to_json(const ObservationSet& x, const json& generator = nullptr) {
  x.validate();
  json doc = header("kinid.dataset");
  doc["n_markers"] = x.n_markers();
  doc["n_signals"] = x.n_signals();
  if (!generator.is_null()) doc["generator"] = generator;
  json obs = json::array();
  for (int t = 0; t < x.size(); ++t) {
    json markers = json::array();
    for (const auto& p : x.marker_poses[t]) markers.push_back(pose_record(p));
    json qj = json::array();
    for (int k = 0; k < x.n_signals(); ++k) qj.push_back(x.joint_values(t, k));
    obs.push_back(json{{"t", x.times[t]}, {"q", qj}, {"markers", markers}});
  }
  doc["observations"] = obs;
  return doc;
}

inline ObservationSet dataset_from_json(const json& j, const std::string& origin = "$") {
  const Reader doc(j, origin);
  check_header(doc, "kinid.dataset");
  const Reader obs = doc.at("observations");
  const std::size_t t_count = obs.array_size();
  if (t_count == 0) throw ParseError(obs.path(), "at least one observation required");
  const int n = doc.at("n_markers").integer();
  const int m = doc.has("n_signals") ? doc.at("n_signals").integer() : n - 1;
  if (n < 2 || m != n - 1) throw ParseError(doc.path(), "need n_markers >= 2 and n_signals = n_markers - 1");

  ObservationSet x;
  x.joint_values.resize(static_cast<Eigen::Index>(t_count), m);
  for (std::size_t t = 0; t < t_count; ++t) {
    const Reader row = obs.at(t);
    const double time = row.at("t").number();
    if (!x.times.empty() && !(time > x.times.back()))
      throw InvariantViolation(row.path() + ".t: times must be strictly increasing");
    x.times.push_back(time);
    const auto q = row.at("q").numbers();
    if (static_cast<int>(q.size()) != m)
      throw ParseError(row.path() + ".q", "expected " + std::to_string(m) + " joint values");
    for (int k = 0; k < m; ++k) x.joint_values(static_cast<Eigen::Index>(t), k) = q[static_cast<std::size_t>(k)];
    const Reader markers = row.at("markers");
    if (static_cast<int>(markers.array_size()) != n)
      throw InvariantViolation(markers.path() + ": expected " + std::to_string(n) + " markers");
    std::vector<Pose> poses;
    for (int i = 0; i < n; ++i) poses.push_back(pose_from_record(markers.at(static_cast<std::size_t>(i))));
    x.marker_poses.push_back(std::move(poses));
  }
  x.validate();
  return x;
}

inline void write_dataset(const ObservationSet& x, const std::string& path, const json& generator = nullptr) {
  save(dataset_to_json(x, generator), path);
}

inline ObservationSet read_dataset(const std::string& path) { return dataset_from_json(load(path), path); }

// ---- chains --------------------------------------------------------------

inline json pose_exact(const Pose& p) {
  return json{{"position", vec3(p.position)}, {"rotation", matrix_rows(p.orientation.matrix())}};
}

inline Pose pose_exact_from(const Reader& r) {
  return Pose{r.at("position").vec3(), r.at("rotation").matrix_rows(), {}};
}

/// Rotations are stored as full matrices so that chains round-trip exactly.
inline json chain_to_json(const ChainSpec& c) {
  c.validate();
  json doc = header("kinid.chain");
  doc["n_links"] = c.n_links();
  json joints = json::array();
  for (const auto& j : c.joints)
    joints.push_back(json{{"type", to_string(j.type)}, {"theta0", j.theta0}, {"d0", j.d0}, {"a", j.a}, {"alpha", j.alpha}});
  doc["joints"] = joints;
  json att = json::array();
  for (const auto& a : c.attachments) att.push_back(json{{"link", a.link}, {"offset", pose_exact(a.offset)}});
  doc["attachments"] = att;
  doc["joint_signal"] = c.joint_signal;
  doc["camera_pose"] = pose_exact(c.camera_pose);
  return doc;
}

inline ChainSpec chain_from_json(const json& j, const std::string& origin = "$") {
  const Reader doc(j, origin);
  check_header(doc, "kinid.chain");
  ChainSpec c;
  const Reader joints = doc.at("joints");
  for (std::size_t i = 0; i < joints.array_size(); ++i) {
    const Reader r = joints.at(i);
    DhJoint jt;
    const std::string type = r.at("type").string();
    if (type == "prismatic")
      jt.type = JointType::Prismatic;
    else if (type == "revolute")
      jt.type = JointType::Revolute;
    else
      throw ParseError(r.path() + ".type", "unknown joint type '" + type + "'");
    jt.theta0 = r.at("theta0").number();
    jt.d0 = r.at("d0").number();
    jt.a = r.at("a").number();
    jt.alpha = r.at("alpha").number();
    c.joints.push_back(jt);
  }
  const Reader att = doc.at("attachments");
  for (std::size_t i = 0; i < att.array_size(); ++i)
    c.attachments.push_back({att.at(i).at("link").integer(), pose_exact_from(att.at(i).at("offset"))});
  const Reader sig = doc.at("joint_signal");
  for (std::size_t i = 0; i < sig.array_size(); ++i) c.joint_signal.push_back(sig.at(i).integer());
  c.camera_pose = pose_exact_from(doc.at("camera_pose"));
  c.camera_pose.frame = kCameraFrame;
  c.validate();
  return c;
}

inline void write_chain(const ChainSpec& c, const std::string& path) { save(chain_to_json(c), path); }
inline ChainSpec read_chain(const std::string& path) { return chain_from_json(load(path), path); }

// ---- trajectories --------------------------------------------------------

inline json trajectory_to_json(const Trajectory& traj, const std::string& mode,
                               const std::vector<std::pair<int, int>>& pairs = {}, const json& config = nullptr) {
  json doc = header("kinid.trajectory");
  doc["mode"] = mode;
  if (!config.is_null()) doc["config"] = config;
  doc["n_signals"] = traj.n_signals();
  doc["times"] = traj.times;
  json rows = json::array();
  for (int t = 0; t < traj.size(); ++t) {
    json row = json::array();
    for (int k = 0; k < traj.n_signals(); ++k) row.push_back(traj.q(t, k));
    rows.push_back(row);
  }
  doc["rows"] = rows;
  if (!pairs.empty()) {
    json pj = json::array();
    for (const auto& [a, b] : pairs) pj.push_back(json::array({a, b}));
    doc["pairs"] = pj;
  }
  return doc;
}

inline Trajectory trajectory_from_json(const json& j, const std::string& origin = "$") {
  const Reader doc(j, origin);
  check_header(doc, "kinid.trajectory");
  const int m = doc.at("n_signals").integer();
  const Reader rows = doc.at("rows");
  Trajectory traj;
  traj.times = doc.at("times").numbers();
  traj.q.resize(static_cast<Eigen::Index>(rows.array_size()), m);
  if (traj.times.size() != rows.array_size()) throw ParseError(doc.path(), "times and rows differ in length");
  for (std::size_t t = 0; t < rows.array_size(); ++t) {
    const auto row = rows.at(t).numbers(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) traj.q(static_cast<Eigen::Index>(t), k) = row[static_cast<std::size_t>(k)];
  }
  return traj;
}

// ---- results -------------------------------------------------------------

inline json tolerances_to_json(const Tolerances& t) {
  return json{{"tol_res", t.tol_res},
              {"tol_con", t.tol_con},
              {"tol_const_rot", t.tol_const_rot},
              {"rank_rel_tol", t.rank_rel_tol},
              {"multistart_count", t.multistart_count},
              {"max_iterations", t.max_iterations},
              {"restart_seed", t.restart_seed}};
}

inline json test_result_to_json(const TestResult& r) {
  json j{{"outcome", to_string(r.outcome)},
         {"residual", number(r.residual)},
         {"constraint_violation", number(r.constraint_violation)},
         {"rank", r.rank}};
  if (r.rotation_drift != 0.0) j["rotation_drift"] = number(r.rotation_drift);
  if (r.iterations != 0) j["iterations"] = r.iterations;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json verdict_to_json(const TripletVerdict& v) {
  json j{{"i1", v.id.i1}, {"i2", v.id.i2}, {"k", v.id.k}, {"kind", to_string(v.kind)},
         {"prismatic", test_result_to_json(v.prismatic)}};
  if (v.revolute_linear) j["revolute_linear"] = test_result_to_json(*v.revolute_linear);
  if (v.revolute_nonlinear) j["revolute_nonlinear"] = test_result_to_json(*v.revolute_nonlinear);
  return j;
}

inline json structure_to_json(const KinematicStructure& s) {
  json types = json::array();
  for (auto t : s.joint_types) types.push_back(t == JointType::Prismatic ? 0 : 1);
  return json{{"marker_sequence", s.marker_sequence}, {"joint_types", types}, {"joint_signals", s.joint_signals}};
}

inline KinematicStructure structure_from_json(const json& j, const std::string& origin = "$") {
  const Reader r(j, origin);
  KinematicStructure s;
  for (double v : r.at("marker_sequence").numbers()) s.marker_sequence.push_back(static_cast<int>(v));
  for (double v : r.at("joint_types").numbers())
    s.joint_types.push_back(v == 0 ? JointType::Prismatic : JointType::Revolute);
  for (double v : r.at("joint_signals").numbers()) s.joint_signals.push_back(static_cast<int>(v));
  return s;
}

inline json confusion_to_json(const ConfusionMatrix& m) {
  return json{{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}, {"inconclusive", m.inconclusive}};
}

inline json mc_config_to_json(const McConfig& c) {
  return json{{"n_series", c.n_series},
              {"n_links", c.n_links},
              {"observations", c.observations},
              {"master_seed", c.master_seed},
              {"sinusoid",
               {{"amplitude_min", c.sinusoid.amplitude_min},
                {"amplitude_max", c.sinusoid.amplitude_max},
                {"frequency_min", c.sinusoid.frequency_min},
                {"frequency_max", c.sinusoid.frequency_max},
                {"sample_rate", c.sinusoid.sample_rate}}},
              {"tolerances", tolerances_to_json(c.tol)}};
}

inline json mc_report_to_json(const McReport& r, const McConfig& cfg) {
  json doc = header("kinid.montecarlo");
  doc["config"] = mc_config_to_json(cfg);
  doc["matrices"] = json{{"prismatic", confusion_to_json(r.prismatic)},
                         {"revolute_linear", confusion_to_json(r.revolute_linear)},
                         {"revolute_nonlinear", confusion_to_json(r.revolute_nonlinear)},
                         {"revolute_combined", confusion_to_json(r.revolute_combined)}};
  doc["triplets_per_series"] = r.triplets_per_series;
  doc["total_triplets"] = r.triplets_per_series * cfg.n_series;
  doc["classifier"] = json{{"correct", r.classifier_correct},
                           {"inconclusive", r.classifier_inconclusive},
                           {"linear_feasible", r.linear_feasible_gated},
                           {"nonlinear_invocations", r.nonlinear_invocations_gated}};
  doc["soundness_violations"] = r.soundness_violations;
  doc["structures_recovered"] = r.structures_recovered;
  doc["structure_recovery_rate"] = static_cast<double>(r.structures_recovered) / cfg.n_series;
  doc["series_seeds"] = r.series_seeds;
  doc["rows_after_dedup"] = r.rows_after_dedup;
  return doc;
}

inline std::string confusion_csv(const McReport& r) {
  std::ostringstream os;
  os << "test,tp,fp,fn,tn\n";
  auto row = [&os](const char* name, const ConfusionMatrix& m) {
    os << name << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn << '\n';
  };
  row("prismatic", r.prismatic);
  row("revolute_linear", r.revolute_linear);
  row("revolute_nonlinear", r.revolute_nonlinear);
  row("revolute_combined", r.revolute_combined);
  return os.str();
}

inline std::string confusion_table(const McReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "test" << std::right << std::setw(8) << "tp" << std::setw(8) << "fp"
     << std::setw(8) << "fn" << std::setw(8) << "tn" << std::setw(8) << "inc" << '\n';
  auto row = [&os](const char* name, const ConfusionMatrix& m) {
    os << std::left << std::setw(20) << name << std::right << std::setw(8) << m.tp << std::setw(8) << m.fp
       << std::setw(8) << m.fn << std::setw(8) << m.tn << std::setw(8) << m.inconclusive << '\n';
  };
  row("prismatic", r.prismatic);
  row("revolute_linear", r.revolute_linear);
  row("revolute_nonlinear", r.revolute_nonlinear);
  row("revolute_combined", r.revolute_combined);
  return os.str();
}

}  // namespace io

using io::read_dataset;
using io::write_dataset;

}  // namespace kinid
