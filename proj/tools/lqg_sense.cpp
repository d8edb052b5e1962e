// lqg_sense: experiment driver for sensing-constrained LQG control.
//
//   lqg_sense run           sweep experiments -> CSV + JSON manifest
//   lqg_sense certify       supermodularity-ratio certificate (JSON)
//   lqg_sense gen-scenario  write a scenario's model JSON
//   lqg_sense simulate      one-off Monte Carlo of a sensor set

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slqg/slqg.hpp"

namespace {

using slqg::io::json;

struct ScenarioArgs {
  std::string scenario = "formation";
  bool heterogeneous = false;
  std::size_t n_agents = 4;
  std::size_t T = 20;
  std::size_t landmarks = 10;
  std::optional<std::uint64_t> seed;
};

void add_scenario_options(CLI::App* app, ScenarioArgs& a) {
  app->add_option("--scenario", a.scenario, "formation, uav, or a model JSON path");
  app->add_flag("--heterogeneous", a.heterogeneous, "formation: weight agent 1 with Q = 10 I");
  app->add_option("--n-agents", a.n_agents, "formation: number of agents")->check(CLI::PositiveNumber);
  app->add_option("-T,--horizon", a.T, "horizon")->check(CLI::PositiveNumber);
  app->add_option("--landmarks", a.landmarks, "uav: number of landmarks");
  app->add_option("--seed", a.seed, "random seed (falls back to LQG_SENSE_SEED)");
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
  if (const char* s = std::getenv("LQG_SENSE_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("LQG_SENSE_SEED is not an integer: ") + s);
    }
  }
  return fallback;
}

slqg::Scenario build_scenario(const ScenarioArgs& a) {
  const std::uint64_t seed = a.seed ? *a.seed : env_seed_or(0);
  if (a.scenario == "formation") {
    slqg::FormationConfig f;
    f.n_agents = a.n_agents;
    f.heterogeneous = a.heterogeneous;
    f.T = a.T;
    f.seed = seed;
    return slqg::formation_scenario(f);
  }
  if (a.scenario == "uav") {
    slqg::UavConfig u;
    u.num_landmarks = a.landmarks;
    u.T = a.T;
    u.seed = seed;
    return slqg::uav_scenario(u);
  }
  return slqg::io::load_scenario(a.scenario);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<slqg::SensorId> parse_ids(const std::string& list) {
  std::vector<slqg::SensorId> ids;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) ids.push_back(std::stoi(item));
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensing-constrained LQG: sensor selection, certificates and Monte Carlo experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a sweep experiment and write CSV + manifest");
  std::string config_path;
  slqg::ExperimentConfig flags;
  std::optional<std::uint64_t> run_seed;
  std::vector<std::size_t> values;
  std::vector<std::string> methods;
  bool het = false;
  bool normalize = false;
  run->add_option("--config", config_path, "JSON config; flags override its fields")->check(CLI::ExistingFile);
  run->add_option("--scenario", flags.scenario, "formation, uav, or a model JSON path");
  run->add_flag("--heterogeneous", het, "formation: heterogeneous cost weights");
  run->add_option("--sweep", flags.sweep, "T, k or n_agents")->check(CLI::IsMember({"T", "k", "n_agents"}));
  run->add_option("--values", values, "sweep values")->delimiter(',');
  run->add_option("--methods", methods, "subset of slqg,optimal,logdet,random,allSensors")->delimiter(',');
  run->add_option("--runs", flags.runs, "Monte Carlo runs per cell");
  run->add_option("--seed", run_seed, "base seed (falls back to LQG_SENSE_SEED)");
  run->add_option("-o,--output", flags.output, "CSV path; the manifest goes next to it");
  run->add_option("-k,--budget", flags.k, "sensor budget");
  run->add_option("-T,--horizon", flags.T, "horizon");
  run->add_option("--n-agents", flags.n_agents, "formation agents");
  run->add_option("--landmarks", flags.num_landmarks, "uav landmarks");
  run->add_flag("--normalize-by-T", normalize, "divide costs by the horizon");
  run->add_option("--jobs", flags.jobs, "cells run in parallel");
  run->add_option("--enumeration-cap", flags.enumeration_cap, "max subsets the optimal method enumerates");

  // certify
  auto* certify = app.add_subcommand("certify", "compute the supermodularity-ratio certificate");
  ScenarioArgs cert_args;
  std::optional<std::size_t> cert_k;
  std::string cert_out;
  add_scenario_options(certify, cert_args);
  certify->add_option("-k,--budget", cert_k, "also report the greedy suboptimality ratio at this budget");
  certify->add_option("-o,--output", cert_out, "output file (default stdout)");

  // gen-scenario
  auto* gen = app.add_subcommand("gen-scenario", "write a generated scenario as model JSON");
  ScenarioArgs gen_args;
  std::string gen_out;
  add_scenario_options(gen, gen_args);
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo of one sensor set");
  ScenarioArgs sim_args;
  std::string sensors_arg;
  std::string policy = "slqg";
  std::size_t sim_k = 0;
  std::size_t sim_runs = 1000;
  std::string law = "kalman";
  std::string sim_out;
  add_scenario_options(sim, sim_args);
  sim->add_option("--sensors", sensors_arg, "explicit comma-separated sensor ids (overrides --policy)");
  sim->add_option("--policy", policy, "selection policy")
      ->check(CLI::IsMember({"slqg", "optimal", "logdet", "random", "allSensors", "none"}));
  sim->add_option("-k,--budget", sim_k, "sensor budget for --policy");
  sim->add_option("--runs", sim_runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  sim->add_option("--law", law, "control law")->check(CLI::IsMember({"kalman", "perfect", "zero"}));
  sim->add_option("-o,--output", sim_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      slqg::ExperimentConfig cfg;
      json config_json = json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        config_json = json::parse(in);
        cfg = slqg::config_from_json(config_json);
      }
      if (run_seed) {
        cfg.seed = *run_seed;
      } else if (!config_json.contains("seed")) {
        cfg.seed = env_seed_or(cfg.seed);
      }
      if (run->get_option("--scenario")->count()) cfg.scenario = flags.scenario;
      if (het) cfg.heterogeneous = true;
      if (run->get_option("--sweep")->count()) cfg.sweep = flags.sweep;
      if (!values.empty()) cfg.sweep_values = values;
      if (!methods.empty()) cfg.methods = methods;
      if (run->get_option("--runs")->count()) cfg.runs = flags.runs;
      if (run->get_option("--output")->count()) cfg.output = flags.output;
      if (flags.k) cfg.k = flags.k;
      if (flags.T) cfg.T = flags.T;
      if (flags.n_agents) cfg.n_agents = flags.n_agents;
      if (flags.num_landmarks) cfg.num_landmarks = flags.num_landmarks;
      if (normalize) cfg.normalize_by_T = true;
      if (run->get_option("--jobs")->count()) cfg.jobs = flags.jobs;
      if (run->get_option("--enumeration-cap")->count()) cfg.enumeration_cap = flags.enumeration_cap;

      const slqg::ExperimentResult res = slqg::run_experiment(cfg);
      slqg::write_outputs(cfg, res);
      for (const auto& s : res.skipped) std::cerr << "warning: skipped " << s << '\n';
      for (const auto& f : res.failed) std::cerr << "error: " << f << '\n';
      std::cerr << res.rows.size() << " rows written to " << cfg.output << '\n';
      return res.ok() ? 0 : 1;
    }

    if (*certify) {
      const slqg::Scenario sc = build_scenario(cert_args);
      const slqg::RiccatiSolution ricc = slqg::backward_riccati(sc.system);
      json j = slqg::io::to_json(slqg::certify(sc.system, ricc, sc.ground));
      if (cert_k) j["suboptimality"] = slqg::io::to_json(slqg::suboptimality_report(sc.system, ricc, sc.ground, *cert_k));
      emit(cert_out, j.dump(2) + "\n");
      return 0;
    }

    if (*gen) {
      if (gen_args.scenario != "formation" && gen_args.scenario != "uav") {
        throw std::invalid_argument("gen-scenario expects --scenario formation or uav");
      }
      emit(gen_out, slqg::io::scenario_to_json(build_scenario(gen_args)).dump() + "\n");
      return 0;
    }

    if (*sim) {
      const slqg::Scenario sc = build_scenario(sim_args);
      const std::uint64_t seed = sim_args.seed ? *sim_args.seed : env_seed_or(0);
      const slqg::RiccatiSolution ricc = slqg::backward_riccati(sc.system);
      slqg::SensorSet s;
      if (!sensors_arg.empty()) {
        s = slqg::SensorSet(parse_ids(sensors_arg));
      } else if (policy != "none") {
        s = slqg::detail::select(policy, sc, ricc, sim_k, seed, slqg::kDefaultEnumerationCap).chosen;
      }
      const auto control = law == "kalman"    ? slqg::ControlLaw::kalman_feedback
                           : law == "perfect" ? slqg::ControlLaw::perfect_state
                                              : slqg::ControlLaw::zero;
      const auto mc = slqg::simulate_policy(sc.system, ricc, sc.ground, s, control, sim_runs, seed);
      json j = slqg::io::to_json(mc);
      j["analytic_cost"] = slqg::expected_lqg_cost(sc.system, ricc, sc.ground, s);
      j["control_law"] = law;
      emit(sim_out, j.dump(2) + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
