#include <gtest/gtest.h>

#include <fstream>

#include "kinid/io.hpp"
#include "tmp_dir.hpp"

using namespace kinid;
using kinid::io::json;
using kinid::testing::TempDir;

namespace {

ObservationSet sample_set(int n, int rows, std::uint64_t seed) {
  return observe(random_chain(seed, n), gen_sinusoidal(n - 1, rows, {}, seed));
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(Dataset, RoundTripSixMarkersFiftyRows) {
  TempDir dir;
  const auto x = sample_set(6, 50, 3);
  write_dataset(x, dir.file("d.json"));
  const auto y = read_dataset(dir.file("d.json"));
  ASSERT_EQ(y.size(), 50);
  ASSERT_EQ(y.n_markers(), 6);
  EXPECT_EQ(y.times, x.times);
  EXPECT_EQ((y.joint_values - x.joint_values).cwiseAbs().maxCoeff(), 0.0);
  double worst = 0;
  for (int t = 0; t < 50; ++t)
    for (int i = 0; i < 6; ++i) {
      worst = std::max(worst, max_abs_diff(x.marker_poses[t][i], y.marker_poses[t][i]));
      EXPECT_EQ(y.marker_poses[t][i].frame, kCameraFrame);
    }
  EXPECT_LT(worst, 1e-12);
}

TEST(Dataset, EmptyObservationsIsParseError) {
  json doc = io::header("kinid.dataset");
  doc["n_markers"] = 2;
  doc["observations"] = json::array();
  EXPECT_THROW(io::dataset_from_json(doc), ParseError);
}

TEST(Dataset, NonUnitQuaternionRejected) {
  json doc = io::dataset_to_json(sample_set(3, 2, 1));
  doc["observations"][1]["markers"][2]["quaternion"] = json::array({1.1, 0.0, 0.0, 0.0});
  try {
    io::dataset_from_json(doc, "mem");
    FAIL();
  } catch (const InvariantViolation& e) {
    EXPECT_NE(std::string(e.what()).find("observations[1].markers[2]"), std::string::npos);
  }
}

TEST(Dataset, YprOnlyRecordAccepted) {
  json doc = io::dataset_to_json(sample_set(3, 2, 1));
  auto& rec = doc["observations"][0]["markers"][1];
  const auto q = rec["quaternion"];
  rec.erase("quaternion");
  const auto x = io::dataset_from_json(doc);
  const Rotation r = Rotation::from_quaternion(
      Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()));
  EXPECT_LT(max_abs_diff(x.marker_poses[0][1].orientation, r), 1e-9);
}

TEST(Dataset, SchemaAndStructureErrors) {
  json doc = io::dataset_to_json(sample_set(3, 3, 2));
  json bad = doc;
  bad["schema_version"] = 99;
  EXPECT_THROW(io::dataset_from_json(bad), SchemaVersionMismatch);
  bad = doc;
  bad["kind"] = "kinid.chain";
  EXPECT_THROW(io::dataset_from_json(bad), ParseError);
  bad = doc;
  bad["observations"][2]["t"] = 0.0;
  EXPECT_THROW(io::dataset_from_json(bad), InvariantViolation);
  bad = doc;
  bad["observations"][1]["markers"].erase(0);
  EXPECT_THROW(io::dataset_from_json(bad), InvariantViolation);
  bad = doc;
  bad["observations"][0]["q"] = json::array({1.0});
  EXPECT_THROW(io::dataset_from_json(bad), ParseError);
  bad = doc;
  bad["observations"][0].erase("markers");
  try {
    io::dataset_from_json(bad, "f.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "f.json.observations[0].markers");
  }
}

TEST(Dataset, MalformedTextReportsLocation) {
  TempDir dir;
  write_text(dir.file("bad.json"), "{\n  \"a\": 1,\n  oops\n}\n");
  try {
    read_dataset(dir.file("bad.json"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.where().find("bad.json:3:"), std::string::npos) << e.where();
  }
  EXPECT_THROW(read_dataset(dir.file("missing.json")), IoError);
}

TEST(Chain, RoundTripIsExact) {
  TempDir dir;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ChainSpec c = random_chain(s, 5);
    io::write_chain(c, dir.file("c.json"));
    const ChainSpec d = io::read_chain(dir.file("c.json"));
    ASSERT_EQ(d.n_links(), 5);
    EXPECT_EQ(d.joint_signal, c.joint_signal);
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(d.joints[j].type, c.joints[j].type);
      EXPECT_EQ(d.joints[j].theta0, c.joints[j].theta0);
      EXPECT_EQ(d.joints[j].d0, c.joints[j].d0);
      EXPECT_EQ(d.joints[j].a, c.joints[j].a);
      EXPECT_EQ(d.joints[j].alpha, c.joints[j].alpha);
    }
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(d.attachments[i].link, c.attachments[i].link);
      EXPECT_EQ(max_abs_diff(d.attachments[i].offset, c.attachments[i].offset), 0.0);
    }
    // Byte-identical on re-emission.
    EXPECT_EQ(io::chain_to_json(d).dump(), io::chain_to_json(c).dump());
  }
}

TEST(Chain, UnknownJointTypeRejected) {
  json doc = io::chain_to_json(random_chain(1, 3));
  doc["joints"][0]["type"] = "helical";
  EXPECT_THROW(io::chain_from_json(doc), ParseError);
}

TEST(Trajectory, RoundTrip) {
  const auto fi = gen_fully_informative(4, 0.3);
  const auto back = io::trajectory_from_json(io::trajectory_to_json(fi.trajectory, "fully-informative", fi.pairs));
  EXPECT_EQ(back.q, fi.trajectory.q);
  EXPECT_EQ(back.times, fi.trajectory.times);
}

TEST(Results, NonFiniteResidualWrittenAsNull) {
  TestResult r;
  const json j = io::test_result_to_json(r);
  EXPECT_TRUE(j["residual"].is_null());
  EXPECT_EQ(j["outcome"], "inconclusive");
}

TEST(Results, StructureRoundTrip) {
  const auto s = structure_of(random_chain(9, 5));
  EXPECT_EQ(io::structure_from_json(io::structure_to_json(s)), s);
}

TEST(Results, ConfusionCsv) {
  McReport r;
  r.prismatic = {1, 2, 3, 4, 0};
  const std::string csv = io::confusion_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "test,tp,fp,fn,tn");
  EXPECT_NE(csv.find("prismatic,1,2,3,4\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Results, EmissionIsDeterministic) {
  const auto x = sample_set(4, 10, 8);
  EXPECT_EQ(io::dataset_to_json(x).dump(2), io::dataset_to_json(x).dump(2));
}
