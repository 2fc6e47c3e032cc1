#pragma once

// Triplet classification and assembly of the identified chain.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "kinid/chain_sim.hpp"
#include "kinid/errors.hpp"
#include "kinid/feasibility.hpp"

namespace kinid {

enum class TripletKind { Prismatic, Revolute, NotConnected, Inconclusive };

inline const char* to_string(TripletKind k) {
  switch (k) {
    case TripletKind::Prismatic:
      return "prismatic";
    case TripletKind::Revolute:
      return "revolute";
    case TripletKind::NotConnected:
      return "not_connected";
    case TripletKind::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct TripletVerdict {
  TripletId id;
  TripletKind kind = TripletKind::NotConnected;
  TestResult prismatic;
  std::optional<TestResult> revolute_linear;
  std::optional<TestResult> revolute_nonlinear;  ///< only run when the linear test passes
};

/// Prismatic test first; on failure the revolute linear test, and the angular
/// test only when the linear one passes.
inline TripletVerdict classify_triplet(const ObservationSet& x, int i1, int i2, int k,
                                       const Tolerances& tol = {}) {
  if (i1 >= i2) throw IndexOutOfRange("triplets are evaluated with i1 < i2");
  const RelativeSeries s = relative_series(x, i1, i2, k);
  TripletVerdict v;
  v.id = {i1, i2, k};
  v.prismatic = prismatic_test(s, tol);
  if (v.prismatic.feasible()) {
    v.kind = TripletKind::Prismatic;
    return v;
  }
  const bool undecided = v.prismatic.inconclusive();
  v.revolute_linear = revolute_linear_test(s, tol);
  if (!v.revolute_linear->feasible()) {
    v.kind = undecided ? TripletKind::Inconclusive : TripletKind::NotConnected;
    return v;
  }
  v.revolute_nonlinear = revolute_nonlinear_test(s, tol);
  if (v.revolute_nonlinear->feasible())
    v.kind = TripletKind::Revolute;
  else if (v.revolute_nonlinear->inconclusive() || undecided)
    v.kind = TripletKind::Inconclusive;
  else
    v.kind = TripletKind::NotConnected;
  return v;
}

/// Every unordered marker pair (i1 < i2) against every signal.
inline std::vector<TripletId> enumerate_triplets(int n) {
  if (n < 2) throw InvalidRange("at least 2 markers required");
  std::vector<TripletId> out;
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2 * (n - 1)));
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = i1 + 1; i2 < n; ++i2)
      for (int k = 0; k + 1 < n; ++k) out.push_back({i1, i2, k});
  return out;
}

inline std::vector<TripletVerdict> classify_all(const ObservationSet& x, const Tolerances& tol = {}) {
  x.validate();
  tol.validate();
  std::vector<TripletVerdict> out;
  for (const auto& id : enumerate_triplets(x.n_markers()))
    out.push_back(classify_triplet(x, id.i1, id.i2, id.k, tol));
  return out;
}

/// The identified chain, listed from the base marker outwards.
struct KinematicStructure {
  std::vector<int> marker_sequence;
  std::vector<JointType> joint_types;
  std::vector<int> joint_signals;

  friend bool operator==(const KinematicStructure&, const KinematicStructure&) = default;
};

/// Structure implied by a ground-truth chain.
inline KinematicStructure structure_of(const ChainSpec& chain) {
  KinematicStructure s;
  for (int j = 0; j < chain.n_links(); ++j) s.marker_sequence.push_back(chain.marker_on_link(j));
  for (const auto& joint : chain.joints) s.joint_types.push_back(joint.type);
  s.joint_signals = chain.joint_signal;
  return s;
}

/// Marker whose camera-frame pose varies least over the observations.
inline int select_base_marker(const ObservationSet& x) {
  int best = 0;
  double best_var = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.n_markers(); ++i) {
    const Pose& p0 = x.marker_poses.front()[i];
    double var = 0.0;
    for (const auto& row : x.marker_poses)
      var += (row[i].position - p0.position).norm() +
             (row[i].orientation.matrix() - p0.orientation.matrix()).norm();
    if (var < best_var) {
      best_var = var;
      best = i;
    }
  }
  return best;
}

/// Builds the marker path from the positive verdicts. Throws StructureAmbiguous
/// unless the accepted edges form a single simple path through all `n` markers
/// that starts at `base_marker`, with each signal used once and no
/// inconclusive triplet left.
inline KinematicStructure assemble_chain(const std::vector<TripletVerdict>& verdicts, int n,
                                         int base_marker) {
  if (n < 2) throw InvalidRange("at least 2 markers required");
  if (base_marker < 0 || base_marker >= n) throw IndexOutOfRange("base marker out of range");

  struct Edge {
    JointType type;
    int signal;
  };
  std::map<std::pair<int, int>, std::vector<Edge>> by_pair;
  std::vector<TripletId> inconclusive;
  for (const auto& v : verdicts) {
    if (v.kind == TripletKind::Inconclusive) inconclusive.push_back(v.id);
    if (v.kind != TripletKind::Prismatic && v.kind != TripletKind::Revolute) continue;
    const JointType type = v.kind == TripletKind::Prismatic ? JointType::Prismatic : JointType::Revolute;
    by_pair[{std::min(v.id.i1, v.id.i2), std::max(v.id.i1, v.id.i2)}].push_back({type, v.id.k});
  }
  std::sort(inconclusive.begin(), inconclusive.end(), [](const TripletId& a, const TripletId& b) {
    return std::tie(a.i1, a.i2, a.k) < std::tie(b.i1, b.i2, b.k);
  });

  // Every signal drives exactly one joint, so a signal labelling no accepted
  // edge is a missing edge even when other pairs make up the count.
  std::vector<bool> signal_seen(static_cast<std::size_t>(n - 1), false);
  for (const auto& [pair, list] : by_pair)
    for (const auto& e : list)
      if (e.signal >= 0 && e.signal < n - 1) signal_seen[static_cast<std::size_t>(e.signal)] = true;
  const int unused = static_cast<int>(std::count(signal_seen.begin(), signal_seen.end(), false));
  const int edges = static_cast<int>(by_pair.size());
  const int missing = std::max(n - 1 - edges, unused);
  auto fail = [&](const std::string& why) { throw StructureAmbiguous(why, inconclusive, missing); };

  for (const auto& [pair, list] : by_pair)
    if (list.size() > 1) {
      std::ostringstream os;
      os << "markers " << pair.first << " and " << pair.second << " match " << list.size()
         << " (type, signal) combinations";
      fail(os.str());
    }
  if (missing > 0) fail(std::to_string(missing) + " missing edge(s)");
  if (edges > n - 1) fail(std::to_string(edges - (n - 1)) + " surplus edge(s)");
  if (!inconclusive.empty())
    fail(std::to_string(inconclusive.size()) + " inconclusive triplet(s)");

  std::map<int, int> signal_use;
  std::vector<std::vector<std::pair<int, Edge>>> adj(n);
  for (const auto& [pair, list] : by_pair) {
    if (++signal_use[list.front().signal] > 1)
      fail("signal " + std::to_string(list.front().signal) + " drives more than one joint");
    adj[pair.first].push_back({pair.second, list.front()});
    adj[pair.second].push_back({pair.first, list.front()});
  }
  for (int i = 0; i < n; ++i)
    if (adj[i].size() > 2) fail("marker " + std::to_string(i) + " is a branch point");
  if (adj[base_marker].size() != 1)
    fail("base marker " + std::to_string(base_marker) + " is not an end of the chain");

  KinematicStructure s;
  s.marker_sequence.push_back(base_marker);
  int prev = -1, cur = base_marker;
  while (true) {
    const auto next = std::find_if(adj[cur].begin(), adj[cur].end(),
                                   [prev](const auto& e) { return e.first != prev; });
    if (next == adj[cur].end()) break;
    s.joint_types.push_back(next->second.type);
    s.joint_signals.push_back(next->second.signal);
    prev = cur;
    cur = next->first;
    s.marker_sequence.push_back(cur);
    if (static_cast<int>(s.marker_sequence.size()) > n) fail("cycle in verdict graph");
  }
  if (static_cast<int>(s.marker_sequence.size()) != n) fail("verdict graph is disconnected");
  return s;
}

inline KinematicStructure identify_structure(const ObservationSet& x, const Tolerances& tol = {}) {
  const auto verdicts = classify_all(x, tol);
  return assemble_chain(verdicts, x.n_markers(), select_base_marker(x));
}

}  // namespace kinid
