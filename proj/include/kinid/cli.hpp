#pragma once

// Command-line front end: simulate, identify, montecarlo, gen-trajectory.
//
// Exit codes: 0 success, 1 I/O or data error, 2 ambiguous structure,
// 64 usage error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kinid/chain_sim.hpp"
#include "kinid/feasibility.hpp"
#include "kinid/identify.hpp"
#include "kinid/io.hpp"
#include "kinid/montecarlo.hpp"

namespace kinid {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitAmbiguous = 2, kExitUsage = 64 };

namespace cli {

using io::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::string chain_out_default(const std::string& out) {
  const auto dot = out.rfind(".json");
  return (dot != std::string::npos && dot + 5 == out.size() ? out.substr(0, dot) : out) + ".chain.json";
}

struct SimulateOpts {
  std::string chain_file;
  bool random = false;
  std::uint64_t seed = 1;
  int links = 4;
  std::string trajectory = "sinusoid";
  int obs = 50;
  double delta = 0.5;
  std::string out;
  std::string chain_out;
};

inline int run_simulate(const SimulateOpts& o, bool obs_given, std::ostream& log) {
  if (o.trajectory == "fully-informative" && obs_given)
    throw UsageError("--obs does not apply to --trajectory fully-informative");
  const ChainSpec chain = o.random ? random_chain(o.seed, o.links) : io::read_chain(o.chain_file);
  const int m = chain.n_signals();
  Trajectory traj;
  json gen{{"command", "simulate"}, {"trajectory", o.trajectory}, {"seed", o.seed}};
  if (o.trajectory == "sinusoid") {
    std::vector<bool> periodic;
    for (int k = 0; k < m; ++k) periodic.push_back(chain.signal_is_revolute(k));
    traj = dedup_mod2pi(gen_sinusoidal(m, o.obs, SinusoidConfig{}, splitmix64(o.seed ^ 0x5157ULL)), periodic);
    gen["obs"] = o.obs;
  } else {
    traj = gen_fully_informative(m, o.delta).trajectory;
    gen["delta"] = o.delta;
  }
  if (o.random) {
    const std::string chain_path = o.chain_out.empty() ? chain_out_default(o.out) : o.chain_out;
    io::write_chain(chain, chain_path);
    gen["chain"] = chain_path;
    gen["links"] = o.links;
    log << "chain written to " << chain_path << '\n';
  } else {
    gen["chain"] = o.chain_file;
  }
  io::write_dataset(observe(chain, traj), o.out, gen);
  log << traj.size() << " observations of " << chain.n_links() << " markers written to " << o.out << '\n';
  return kExitOk;
}

struct IdentifyOpts {
  std::string data;
  std::string out;
  Tolerances tol;
};

inline int run_identify(const IdentifyOpts& o, std::ostream& log) {
  o.tol.validate();
  const ObservationSet x = io::read_dataset(o.data);
  const auto verdicts = classify_all(x, o.tol);
  const int base = select_base_marker(x);

  json doc = io::header("kinid.identification");
  doc["config"] = json{{"data", o.data}, {"tolerances", io::tolerances_to_json(o.tol)}};
  doc["n_markers"] = x.n_markers();
  doc["observations"] = x.size();
  doc["base_marker"] = base;
  json triplets = json::array();
  for (const auto& v : verdicts) triplets.push_back(io::verdict_to_json(v));

  int code = kExitOk;
  try {
    const KinematicStructure s = assemble_chain(verdicts, x.n_markers(), base);
    doc["status"] = "identified";
    doc["structure"] = io::structure_to_json(s);
    log << "identified: " << io::structure_to_json(s).dump() << '\n';
  } catch (const StructureAmbiguous& e) {
    json inc = json::array();
    for (const auto& t : e.inconclusive()) inc.push_back(json::array({t.i1, t.i2, t.k}));
    doc["status"] = "ambiguous";
    doc["structure"] = nullptr;
    doc["diagnostics"] = json{{"reason", e.reason()}, {"missing_edges", e.missing_edges()}, {"inconclusive", inc}};
    log << e.what() << '\n';
    if (e.missing_edges() > 0) log << "missing edges: " << e.missing_edges() << '\n';
    code = kExitAmbiguous;
  }
  doc["triplets"] = triplets;
  io::save(doc, o.out);
  return code;
}

struct MontecarloOpts {
  McConfig cfg;
  std::string out;
  std::string csv;
  std::string types = "random";
};

inline int run_montecarlo_cmd(MontecarloOpts o, std::ostream& log, std::ostream& diag) {
  if (o.types == "revolute")
    o.cfg.types = TypePolicy::all_revolute();
  else if (o.types == "prismatic")
    o.cfg.types = TypePolicy::all_prismatic();
  const McRun run = run_montecarlo(o.cfg);
  io::save(io::mc_report_to_json(run.report, o.cfg), o.out);
  if (!o.csv.empty()) {
    std::ofstream csv(o.csv);
    if (!csv) throw IoError("cannot open '" + o.csv + "' for writing");
    csv << io::confusion_csv(run.report);
  }
  log << io::confusion_table(run.report);
  log << "structures recovered: " << run.report.structures_recovered << " / " << o.cfg.n_series << '\n';
  diag << "all-tests time " << run.timing.all_tests_seconds << " s, gated time " << run.timing.gated_seconds
        << " s\n";
  return kExitOk;
}

struct GenTrajectoryOpts {
  std::string mode = "fully-informative";
  int links = 4;
  double delta = 0.5;
  int obs = 50;
  std::uint64_t seed = 1;
  std::string out;
};

inline int run_gen_trajectory(const GenTrajectoryOpts& o, std::ostream& log) {
  const int m = o.links - 1;
  json doc;
  if (o.mode == "fully-informative") {
    const auto fi = gen_fully_informative(m, o.delta);
    doc = io::trajectory_to_json(fi.trajectory, o.mode, fi.pairs, json{{"links", o.links}, {"delta", o.delta}});
    log << fi.trajectory.size() << " rows written to " << o.out << '\n';
  } else {
    const auto traj = gen_sinusoidal(m, o.obs, SinusoidConfig{}, o.seed);
    doc = io::trajectory_to_json(traj, o.mode, {}, json{{"links", o.links}, {"obs", o.obs}, {"seed", o.seed}});
    log << traj.size() << " rows written to " << o.out << '\n';
  }
  io::save(doc, o.out);
  return kExitOk;
}

}  // namespace cli

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  using namespace cli;
  CLI::App app{"Kinematic structure identification from marker poses and joint signals", "kinid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a chain and write a dataset");
  auto* chain_opt = simulate->add_option("--chain", sim.chain_file, "Chain file to simulate")->check(CLI::ExistingFile);
  auto* random_opt = simulate->add_flag("--random", sim.random, "Generate a random chain");
  chain_opt->excludes(random_opt);
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  auto* links_opt = simulate->add_option("--links", sim.links, "Link count for --random")
                        ->check(CLI::Range(2, 64))
                        ->capture_default_str();
  links_opt->needs(random_opt);
  simulate->add_option("--trajectory", sim.trajectory, "sinusoid | fully-informative")
      ->check(CLI::IsMember({"sinusoid", "fully-informative"}))
      ->capture_default_str();
  auto* sim_obs = simulate->add_option("--obs", sim.obs, "Samples for sinusoid trajectories")
                      ->check(CLI::Range(1, 1000000))
                      ->capture_default_str();
  simulate->add_option("--delta", sim.delta, "Displacement for fully-informative trajectories")->capture_default_str();
  simulate->add_option("--out", sim.out, "Dataset output file")->required();
  simulate->add_option("--chain-out", sim.chain_out, "Chain output file for --random");

  IdentifyOpts ident;
  auto* identify = app.add_subcommand("identify", "Identify the kinematic structure of a dataset");
  identify->add_option("--data", ident.data, "Dataset file")->required();
  identify->add_option("--out", ident.out, "Result output file")->required();
  identify->add_option("--tol-res", ident.tol.tol_res, "Residual tolerance")->capture_default_str();
  identify->add_option("--tol-con", ident.tol.tol_con, "Unit-norm constraint tolerance")->capture_default_str();
  identify->add_option("--tol-const-rot", ident.tol.tol_const_rot, "Relative-rotation constancy tolerance")
      ->capture_default_str();
  identify->add_option("--multistart", ident.tol.multistart_count, "Angular-solver restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  identify->add_option("--max-iterations", ident.tol.max_iterations, "Angular-solver iterations per restart")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  MontecarloOpts mc;
  auto* montecarlo = app.add_subcommand("montecarlo", "Confusion matrices over random chains and sinusoids");
  montecarlo->add_option("--series", mc.cfg.n_series, "Number of time series")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  montecarlo->add_option("--links", mc.cfg.n_links, "Links per chain")->check(CLI::Range(2, 64))->capture_default_str();
  montecarlo->add_option("--obs", mc.cfg.observations, "Observations per series")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  montecarlo->add_option("--seed", mc.cfg.master_seed, "Master seed")->capture_default_str();
  montecarlo->add_option("--threads", mc.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  montecarlo->add_option("--types", mc.types, "random | revolute | prismatic")
      ->check(CLI::IsMember({"random", "revolute", "prismatic"}))
      ->capture_default_str();
  montecarlo->add_option("--amp-min", mc.cfg.sinusoid.amplitude_min)->capture_default_str();
  montecarlo->add_option("--amp-max", mc.cfg.sinusoid.amplitude_max)->capture_default_str();
  montecarlo->add_option("--freq-min", mc.cfg.sinusoid.frequency_min)->capture_default_str();
  montecarlo->add_option("--freq-max", mc.cfg.sinusoid.frequency_max)->capture_default_str();
  montecarlo->add_option("--tol-res", mc.cfg.tol.tol_res)->capture_default_str();
  montecarlo->add_option("--multistart", mc.cfg.tol.multistart_count)->check(CLI::PositiveNumber)->capture_default_str();
  montecarlo->add_option("--out", mc.out, "Report output file")->required();
  montecarlo->add_option("--csv", mc.csv, "Confusion-matrix CSV output");

  GenTrajectoryOpts gt;
  auto* gen = app.add_subcommand("gen-trajectory", "Write an excitation trajectory");
  gen->add_option("--mode", gt.mode, "fully-informative | sinusoid")
      ->check(CLI::IsMember({"fully-informative", "sinusoid"}))
      ->capture_default_str();
  gen->add_option("--links", gt.links, "Link count")->check(CLI::Range(2, 64))->capture_default_str();
  gen->add_option("--delta", gt.delta, "Per-signal displacement")->capture_default_str();
  auto* gen_obs = gen->add_option("--obs", gt.obs, "Samples (sinusoid mode)")->check(CLI::Range(1, 1000000));
  gen->add_option("--seed", gt.seed, "Seed (sinusoid mode)")->capture_default_str();
  gen->add_option("--out", gt.out, "Trajectory output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate) {
      if (!sim.random && sim.chain_file.empty()) throw UsageError("simulate needs --chain FILE or --random");
      return run_simulate(sim, sim_obs->count() > 0, out);
    }
    if (*identify) return run_identify(ident, out);
    if (*montecarlo) return run_montecarlo_cmd(mc, out, err);
    if (*gen) {
      if (gt.mode == "fully-informative" && gen_obs->count() > 0)
        throw UsageError("--obs does not apply to --mode fully-informative");
      return run_gen_trajectory(gt, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const InvalidRange& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StructureAmbiguous& e) {
    err << "error: " << e.what() << '\n';
    return kExitAmbiguous;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"kinid"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kinid
