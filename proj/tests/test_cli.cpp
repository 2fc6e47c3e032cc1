#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "kinid/cli.hpp"
#include "tmp_dir.hpp"

using namespace kinid;
using kinid::io::json;
using kinid::testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, SimulateIdentifyRoundTrip) {
  TempDir dir;
  const auto sim = run({"simulate", "--random", "--seed", "12", "--links", "4", "--trajectory", "fully-informative",
                        "--out", dir.file("data.json"), "--chain-out", dir.file("chain.json")});
  ASSERT_EQ(sim.code, 0) << sim.err;
  EXPECT_EQ(read_dataset(dir.file("data.json")).size(), 6);

  const auto id = run({"identify", "--data", dir.file("data.json"), "--out", dir.file("result.json")});
  ASSERT_EQ(id.code, 0) << id.err;
  const json result = io::load(dir.file("result.json"));
  EXPECT_EQ(result["status"], "identified");
  EXPECT_EQ(result["triplets"].size(), 18u);
  EXPECT_TRUE(result["config"].contains("tolerances"));
  const ChainSpec truth = io::read_chain(dir.file("chain.json"));
  EXPECT_EQ(io::structure_from_json(result["structure"]), structure_of(truth));
}

TEST(Cli, SimulateFromChainFileWithSinusoid) {
  TempDir dir;
  io::write_chain(random_chain(4, 3), dir.file("c.json"));
  const auto sim = run({"simulate", "--chain", dir.file("c.json"), "--obs", "25", "--out", dir.file("d.json")});
  ASSERT_EQ(sim.code, 0) << sim.err;
  const json doc = io::load(dir.file("d.json"));
  EXPECT_EQ(doc["generator"]["obs"], 25);
  EXPECT_LE(doc["observations"].size(), 25u);
}

TEST(Cli, FrozenJointExitsAmbiguous) {
  TempDir dir;
  const ChainSpec c = random_chain(6, 4);
  Trajectory tr = gen_sinusoidal(3, 30, {}, 6);
  tr.q.col(2).setConstant(0.1);
  write_dataset(observe(c, tr), dir.file("frozen.json"));
  const auto id = run({"identify", "--data", dir.file("frozen.json"), "--out", dir.file("r.json")});
  EXPECT_EQ(id.code, 2) << id.err;
  EXPECT_NE(id.out.find("missing edges"), std::string::npos);
  const json result = io::load(dir.file("r.json"));
  EXPECT_EQ(result["status"], "ambiguous");
  EXPECT_GE(result["diagnostics"]["missing_edges"].get<int>(), 1);
}

TEST(Cli, MontecarloSingleTriplet) {
  TempDir dir;
  const auto mc = run({"montecarlo", "--series", "1", "--links", "2", "--threads", "1", "--out", dir.file("mc.json"),
                       "--csv", dir.file("mc.csv")});
  ASSERT_EQ(mc.code, 0) << mc.err;
  const json rep = io::load(dir.file("mc.json"));
  EXPECT_EQ(rep["total_triplets"], 1);
  const auto& m = rep["matrices"]["prismatic"];
  EXPECT_EQ(m["tp"].get<int>() + m["fp"].get<int>() + m["fn"].get<int>() + m["tn"].get<int>(), 1);
  EXPECT_EQ(rep["config"]["n_series"], 1);
  std::ifstream csv(dir.file("mc.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "test,tp,fp,fn,tn");
}

TEST(Cli, GenTrajectory) {
  TempDir dir;
  ASSERT_EQ(run({"gen-trajectory", "--mode", "fully-informative", "--links", "6", "--out", dir.file("t.json")}).code, 0);
  const json doc = io::load(dir.file("t.json"));
  EXPECT_EQ(doc["rows"].size(), 10u);
  EXPECT_EQ(doc["pairs"].size(), 5u);
  EXPECT_EQ(run({"gen-trajectory", "--mode", "fully-informative", "--obs", "5", "--out", dir.file("u.json")}).code, 64);
}

TEST(Cli, UsageErrors) {
  TempDir dir;
  EXPECT_EQ(run({"identify", "--bogus"}).code, 64);
  EXPECT_EQ(run({}).code, 64);
  io::write_chain(random_chain(1, 3), dir.file("c.json"));
  EXPECT_EQ(run({"simulate", "--chain", dir.file("c.json"), "--random", "--out", dir.file("d.json")}).code, 64);
  EXPECT_EQ(run({"simulate", "--out", dir.file("d.json")}).code, 64);
  EXPECT_EQ(run({"simulate", "--random", "--trajectory", "fully-informative", "--obs", "5", "--out",
                 dir.file("d.json")})
                .code,
            64);
  EXPECT_EQ(run({"montecarlo", "--series", "0", "--out", dir.file("m.json")}).code, 64);
  const auto bad = run({"identify", "--bogus"});
  EXPECT_NE(bad.err.find("Usage"), std::string::npos);
}

TEST(Cli, IoErrorExitsOne) {
  TempDir dir;
  EXPECT_EQ(run({"identify", "--data", dir.file("nope.json"), "--out", dir.file("r.json")}).code, 1);
}

TEST(Cli, ExecutableExitCodes) {
  const std::string exe = KINID_CLI_PATH;
  EXPECT_EQ(std::system((exe + " --version > /dev/null").c_str()), 0);
  const int status = std::system((exe + " identify --bogus > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 64);
}
