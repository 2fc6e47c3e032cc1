#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kinid/chain_sim.hpp"
#include "kinid/identify.hpp"

using namespace kinid;

namespace {

ObservationSet fi_obs(const ChainSpec& c) { return observe(c, gen_fully_informative(c.n_signals()).trajectory); }

TripletVerdict edge(int i1, int i2, int k, TripletKind kind) {
  TripletVerdict v;
  v.id = {i1, i2, k};
  v.kind = kind;
  return v;
}

}  // namespace

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_triplets(2).size(), 1u);
  EXPECT_EQ(enumerate_triplets(3).size(), 6u);
  EXPECT_EQ(enumerate_triplets(6).size(), 75u);
  for (int n = 2; n < 9; ++n) EXPECT_EQ(enumerate_triplets(n).size(), static_cast<std::size_t>(n * (n - 1) / 2 * (n - 1)));
  for (const auto& t : enumerate_triplets(5)) EXPECT_LT(t.i1, t.i2);
  EXPECT_THROW(enumerate_triplets(1), InvalidRange);
}

TEST(ClassifyTriplet, AdjacentPrismatic) {
  const ChainSpec c = random_chain(3, 2, TypePolicy::all_prismatic());
  const auto v = classify_triplet(fi_obs(c), 0, 1, 0);
  EXPECT_EQ(v.kind, TripletKind::Prismatic);
  EXPECT_FALSE(v.revolute_linear.has_value());
  EXPECT_FALSE(v.revolute_nonlinear.has_value());
}

TEST(ClassifyTriplet, AdjacentRevoluteRunsAngularOnce) {
  const ChainSpec c = random_chain(3, 2, TypePolicy::all_revolute());
  const auto v = classify_triplet(fi_obs(c), 0, 1, 0);
  EXPECT_EQ(v.kind, TripletKind::Revolute);
  ASSERT_TRUE(v.revolute_linear.has_value());
  ASSERT_TRUE(v.revolute_nonlinear.has_value());
  EXPECT_TRUE(v.revolute_nonlinear->feasible());
}

TEST(ClassifyTriplet, LinksOneAndThreeNotConnected) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ChainSpec c = random_chain(seed, 3);
    const auto x = fi_obs(c);
    const int a = c.marker_on_link(0), b = c.marker_on_link(2);
    for (int k = 0; k < 2; ++k)
      EXPECT_EQ(classify_triplet(x, std::min(a, b), std::max(a, b), k).kind, TripletKind::NotConnected);
  }
}

TEST(ClassifyTriplet, OrderRequired) {
  const auto x = fi_obs(random_chain(1, 3));
  EXPECT_THROW(classify_triplet(x, 1, 0, 0), IndexOutOfRange);
}

TEST(ClassifyTriplet, GatingNeverSkipsLinear) {
  const auto x = observe(random_chain(5, 5), gen_sinusoidal(4, 30, {}, 5));
  for (const auto& v : classify_all(x)) {
    if (v.revolute_nonlinear) {
      ASSERT_TRUE(v.revolute_linear.has_value());
      EXPECT_TRUE(v.revolute_linear->feasible());
    }
    if (v.kind == TripletKind::Prismatic) {
      EXPECT_TRUE(v.prismatic.feasible());
    }
    if (v.kind == TripletKind::Revolute) {
      EXPECT_TRUE(v.revolute_linear->feasible() && v.revolute_nonlinear->feasible());
    }
  }
}

TEST(Assemble, PathWithLabels) {
  // a=0, b=1, c=2: a-b prismatic on q1 (index 1), b-c revolute on q0.
  std::vector<TripletVerdict> vs = {edge(0, 1, 1, TripletKind::Prismatic), edge(1, 2, 0, TripletKind::Revolute),
                                    edge(0, 2, 0, TripletKind::NotConnected), edge(0, 1, 0, TripletKind::NotConnected)};
  const auto s = assemble_chain(vs, 3, 0);
  EXPECT_EQ(s.marker_sequence, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(s.joint_types, (std::vector<JointType>{JointType::Prismatic, JointType::Revolute}));
  EXPECT_EQ(s.joint_signals, (std::vector<int>{1, 0}));

  const auto r = assemble_chain(vs, 3, 2);
  EXPECT_EQ(r.marker_sequence, (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(r.joint_signals, (std::vector<int>{0, 1}));
}

TEST(Assemble, Failures) {
  // branch at marker 0
  std::vector<TripletVerdict> branch = {edge(0, 1, 0, TripletKind::Revolute), edge(0, 2, 1, TripletKind::Revolute),
                                        edge(0, 3, 2, TripletKind::Revolute)};
  EXPECT_THROW(assemble_chain(branch, 4, 1), StructureAmbiguous);

  try {
    assemble_chain({}, 2, 0);
    FAIL();
  } catch (const StructureAmbiguous& e) {
    EXPECT_EQ(e.missing_edges(), 1);
  }

  // pair matching two signals
  EXPECT_THROW(assemble_chain({edge(0, 1, 0, TripletKind::Revolute), edge(0, 1, 1, TripletKind::Prismatic),
                               edge(1, 2, 1, TripletKind::Revolute)},
                              3, 0),
               StructureAmbiguous);
  // duplicate signal
  EXPECT_THROW(assemble_chain({edge(0, 1, 0, TripletKind::Revolute), edge(1, 2, 0, TripletKind::Revolute)}, 3, 0),
               StructureAmbiguous);
  // base in the middle
  EXPECT_THROW(assemble_chain({edge(0, 1, 0, TripletKind::Revolute), edge(1, 2, 1, TripletKind::Revolute)}, 3, 1),
               StructureAmbiguous);
  // cycle plus isolated marker: 3 edges on 4 markers
  EXPECT_THROW(assemble_chain({edge(0, 1, 0, TripletKind::Revolute), edge(1, 2, 1, TripletKind::Revolute),
                               edge(0, 2, 2, TripletKind::Revolute)},
                              4, 0),
               StructureAmbiguous);
  // inconclusive triplets listed
  try {
    assemble_chain({edge(0, 1, 0, TripletKind::Revolute), edge(0, 1, 1, TripletKind::Inconclusive),
                    edge(1, 2, 1, TripletKind::Revolute)},
                   3, 0);
    FAIL();
  } catch (const StructureAmbiguous& e) {
    ASSERT_EQ(e.inconclusive().size(), 1u);
    EXPECT_EQ(e.inconclusive()[0], (TripletId{0, 1, 1}));
  }
  EXPECT_THROW(assemble_chain({}, 3, 5), IndexOutOfRange);
}

TEST(Identify, TwoLinkRevolute) {
  const ChainSpec c = random_chain(8, 2, TypePolicy::all_revolute());
  const auto s = identify_structure(fi_obs(c));
  EXPECT_EQ(s.marker_sequence, (std::vector<int>{c.marker_on_link(0), c.marker_on_link(1)}));
  EXPECT_EQ(s.joint_types, (std::vector<JointType>{JointType::Revolute}));
  EXPECT_EQ(s.joint_signals, (std::vector<int>{0}));
}

TEST(Identify, SixLinkExactRecovery) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ChainSpec c = random_chain(seed, 6);
    EXPECT_EQ(identify_structure(fi_obs(c)), structure_of(c)) << "seed " << seed;
  }
}

TEST(Identify, FrozenJointAmbiguous) {
  const ChainSpec c = random_chain(2, 4);
  Trajectory tr = gen_sinusoidal(3, 30, {}, 2);
  tr.q.col(1).setConstant(0.25);
  try {
    identify_structure(observe(c, tr));
    FAIL() << "expected StructureAmbiguous";
  } catch (const StructureAmbiguous& e) {
    EXPECT_GE(e.missing_edges(), 1);
  }
}

TEST(Identify, BaseMarkerIsOnFirstLink) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ChainSpec c = random_chain(seed, 5);
    EXPECT_EQ(select_base_marker(observe(c, gen_sinusoidal(4, 20, {}, seed))), c.marker_on_link(0));
  }
}

TEST(Identify, OrderInvariance) {
  std::mt19937_64 rng(6);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ChainSpec c = random_chain(seed, 5);
    const auto x = fi_obs(c);
    auto verdicts = classify_all(x);
    const auto ref = assemble_chain(verdicts, 5, select_base_marker(x));
    for (int rep = 0; rep < 10; ++rep) {
      std::shuffle(verdicts.begin(), verdicts.end(), rng);
      EXPECT_EQ(assemble_chain(verdicts, 5, select_base_marker(x)), ref);
    }
  }
}

TEST(Identify, StructureOfMatchesChainMaps) {
  const ChainSpec c = random_chain(4, 4);
  const auto s = structure_of(c);
  ASSERT_EQ(s.marker_sequence.size(), 4u);
  for (int j = 0; j < 4; ++j) EXPECT_EQ(c.link_of_marker(s.marker_sequence[j]), j);
  EXPECT_EQ(s.joint_signals, c.joint_signal);
}
