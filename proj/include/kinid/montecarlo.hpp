#pragma once

// Monte Carlo harness: random chains driven by random sinusoids, every
// triplet evaluated against each feasibility system and against the gated
// classifier, results aggregated into confusion matrices.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>
#include <vector>

#include "kinid/chain_sim.hpp"
#include "kinid/feasibility.hpp"
#include "kinid/identify.hpp"

namespace kinid {

struct McConfig {
  int n_series = 128;
  int n_links = 6;
  int observations = 50;
  SinusoidConfig sinusoid;
  Tolerances tol;
  TypePolicy types;
  std::uint64_t master_seed = 1;
  int threads = 0;  ///< 0 picks the hardware concurrency

  void validate() const {
    if (n_series < 1 || n_links < 2 || observations < 2)
      throw InvalidRange("montecarlo needs n_series >= 1, n_links >= 2, observations >= 2");
    tol.validate();
  }
};

/// Rows: predicted positive / negative. Columns: actual positive / negative.
struct ConfusionMatrix {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long inconclusive = 0;  ///< excluded from the four cells

  void add(Outcome predicted, bool actual) {
    if (predicted == Outcome::Inconclusive)
      ++inconclusive;
    else if (predicted == Outcome::Feasible)
      ++(actual ? tp : fp);
    else
      ++(actual ? fn : tn);
  }
  long total() const { return tp + fp + fn + tn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    inconclusive += o.inconclusive;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

enum class TruthLabel { PrismaticAdjacent, RevoluteAdjacent, NotConnected };

/// Ground truth for one triplet: adjacent markers *and* the driving signal.
inline TruthLabel label_triplet_truth(const ChainSpec& chain, int i1, int i2, int k) {
  const int l1 = chain.link_of_marker(i1), l2 = chain.link_of_marker(i2);
  if (std::abs(l1 - l2) != 1) return TruthLabel::NotConnected;
  const int joint = std::min(l1, l2);
  if (chain.joint_signal.at(joint) != k) return TruthLabel::NotConnected;
  return chain.joints[joint].type == JointType::Prismatic ? TruthLabel::PrismaticAdjacent
                                                          : TruthLabel::RevoluteAdjacent;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic part of a run: equal configs give equal reports.
struct McReport {
  ConfusionMatrix prismatic;          ///< prismatic system vs PrismaticAdjacent
  ConfusionMatrix revolute_linear;    ///< linear revolute system vs RevoluteAdjacent
  ConfusionMatrix revolute_nonlinear; ///< angular system vs RevoluteAdjacent
  ConfusionMatrix revolute_combined;  ///< linear AND angular vs RevoluteAdjacent
  long triplets_per_series = 0;
  long classifier_correct = 0;        ///< gated classifier kind == truth label
  long classifier_inconclusive = 0;
  long linear_feasible_gated = 0;     ///< linear-feasible triplets on the gated path
  long nonlinear_invocations_gated = 0;
  long soundness_violations = 0;      ///< true triplets rejected by their matching test
  int structures_recovered = 0;
  std::vector<std::uint64_t> series_seeds;
  std::vector<int> rows_after_dedup;

  friend bool operator==(const McReport&, const McReport&) = default;
};

struct McTiming {
  double all_tests_seconds = 0.0;
  double gated_seconds = 0.0;
};

struct McRun {
  McReport report;
  McTiming timing;
};

namespace detail {

struct SeriesOutcome {
  McReport part;
  McTiming timing;
  int rows = 0;
};

inline SeriesOutcome run_series(const McConfig& cfg, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  SeriesOutcome out;
  McReport& r = out.part;
  const ChainSpec chain = random_chain(seed, cfg.n_links, cfg.types);
  std::vector<bool> periodic;
  for (int k = 0; k < chain.n_signals(); ++k) periodic.push_back(chain.signal_is_revolute(k));
  const Trajectory raw = gen_sinusoidal(chain.n_signals(), cfg.observations, cfg.sinusoid,
                                        splitmix64(seed ^ 0x5157ULL));
  const ObservationSet x = observe(chain, dedup_mod2pi(raw, periodic));
  out.rows = x.size();
  const auto triplets = enumerate_triplets(cfg.n_links);

  const auto t0 = clock::now();
  for (const auto& id : triplets) {
    const TruthLabel truth = label_triplet_truth(chain, id.i1, id.i2, id.k);
    const RelativeSeries s = relative_series(x, id.i1, id.i2, id.k);
    const TestResult p = prismatic_test(s, cfg.tol);
    const TestResult lin = revolute_linear_test(s, cfg.tol);
    const TestResult ang = revolute_nonlinear_test(s, cfg.tol);
    const bool is_p = truth == TruthLabel::PrismaticAdjacent;
    const bool is_r = truth == TruthLabel::RevoluteAdjacent;
    r.prismatic.add(p.outcome, is_p);
    r.revolute_linear.add(lin.outcome, is_r);
    r.revolute_nonlinear.add(ang.outcome, is_r);
    Outcome both = Outcome::Inconclusive;
    if (lin.outcome == Outcome::Infeasible || ang.outcome == Outcome::Infeasible)
      both = Outcome::Infeasible;
    else if (lin.feasible() && ang.feasible())
      both = Outcome::Feasible;
    r.revolute_combined.add(both, is_r);
    if ((is_p && p.outcome == Outcome::Infeasible) ||
        (is_r && (lin.outcome == Outcome::Infeasible || ang.outcome == Outcome::Infeasible)))
      ++r.soundness_violations;
  }
  const auto t1 = clock::now();

  std::vector<TripletVerdict> verdicts;
  verdicts.reserve(triplets.size());
  for (const auto& id : triplets) verdicts.push_back(classify_triplet(x, id.i1, id.i2, id.k, cfg.tol));
  const auto t2 = clock::now();
  out.timing.all_tests_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.timing.gated_seconds = std::chrono::duration<double>(t2 - t1).count();

  for (const auto& v : verdicts) {
    const TruthLabel truth = label_triplet_truth(chain, v.id.i1, v.id.i2, v.id.k);
    if (v.revolute_linear && v.revolute_linear->feasible()) ++r.linear_feasible_gated;
    if (v.revolute_nonlinear) ++r.nonlinear_invocations_gated;
    if (v.kind == TripletKind::Inconclusive) ++r.classifier_inconclusive;
    const bool correct = (truth == TruthLabel::PrismaticAdjacent && v.kind == TripletKind::Prismatic) ||
                         (truth == TruthLabel::RevoluteAdjacent && v.kind == TripletKind::Revolute) ||
                         (truth == TruthLabel::NotConnected && v.kind == TripletKind::NotConnected);
    if (correct) ++r.classifier_correct;
  }
  try {
    if (assemble_chain(verdicts, cfg.n_links, select_base_marker(x)) == structure_of(chain))
      ++r.structures_recovered;
  } catch (const StructureAmbiguous&) {
  }
  return out;
}

}  // namespace detail

inline McRun run_montecarlo(const McConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> seeds(cfg.n_series);
  for (int s = 0; s < cfg.n_series; ++s)
    seeds[s] = splitmix64(cfg.master_seed + static_cast<std::uint64_t>(s));

  std::vector<detail::SeriesOutcome> parts(cfg.n_series);
  int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.n_series);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int s = next++; s < cfg.n_series; s = next++) parts[s] = detail::run_series(cfg, seeds[s]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  McRun run;
  McReport& rep = run.report;
  rep.triplets_per_series = static_cast<long>(enumerate_triplets(cfg.n_links).size());
  rep.series_seeds = seeds;
  for (const auto& p : parts) {
    rep.prismatic += p.part.prismatic;
    rep.revolute_linear += p.part.revolute_linear;
    rep.revolute_nonlinear += p.part.revolute_nonlinear;
    rep.revolute_combined += p.part.revolute_combined;
    rep.classifier_correct += p.part.classifier_correct;
    rep.classifier_inconclusive += p.part.classifier_inconclusive;
    rep.linear_feasible_gated += p.part.linear_feasible_gated;
    rep.nonlinear_invocations_gated += p.part.nonlinear_invocations_gated;
    rep.soundness_violations += p.part.soundness_violations;
    rep.structures_recovered += p.part.structures_recovered;
    rep.rows_after_dedup.push_back(p.rows);
    run.timing.all_tests_seconds += p.timing.all_tests_seconds;
    run.timing.gated_seconds += p.timing.gated_seconds;
  }
  return run;
}

}  // namespace kinid
