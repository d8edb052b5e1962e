#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "slqg/io.hpp"
#include "slqg/riccati.hpp"
#include "slqg/scenarios.hpp"
#include "slqg/selection.hpp"
#include "slqg/sim.hpp"

namespace slqg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvHeader =
    "scenario,sweep_param,sweep_value,method,k,T,n,analytic_cost,mc_mean,mc_stderr,runs,seed";

struct ExperimentConfig {
  std::string scenario = "formation";  // formation | uav | path to a model JSON
  bool heterogeneous = false;
  std::string sweep = "T";  // T | k | n_agents
  std::vector<std::size_t> sweep_values;
  std::vector<std::string> methods = {"slqg", "optimal", "logdet", "random", "allSensors"};
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::string output = "results.csv";
  std::optional<std::size_t> k;
  std::optional<std::size_t> T;
  std::optional<std::size_t> n_agents;
  std::optional<std::size_t> num_landmarks;
  bool normalize_by_T = false;
  std::size_t jobs = 1;
  double enumeration_cap = kDefaultEnumerationCap;
};

struct ExperimentRow {
  std::string scenario;
  std::string sweep_param;
  std::size_t sweep_value = 0;
  std::string method;
  std::size_t k = 0;
  std::size_t T = 0;
  Eigen::Index n = 0;
  double analytic_cost = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> skipped;  // cells refused up front (enumeration cap)
  std::vector<std::string> failed;   // cells that threw
  bool ok() const { return failed.empty(); }
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {"slqg", "optimal", "logdet", "random", "allSensors"};
  return m;
}

inline bool is_builtin_scenario(const std::string& s) { return s == "formation" || s == "uav"; }

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.sweep != "T" && cfg.sweep != "k" && cfg.sweep != "n_agents") {
    throw std::invalid_argument("sweep must be one of T, k, n_agents (got '" + cfg.sweep + "')");
  }
  if (cfg.sweep_values.empty()) throw std::invalid_argument("sweep_values must be nonempty");
  for (std::size_t v : cfg.sweep_values)
    if (v == 0) throw std::invalid_argument("sweep_values must be positive");
  if (cfg.methods.empty()) throw std::invalid_argument("methods must be nonempty");
  for (const auto& m : cfg.methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  if (cfg.runs == 0) throw std::invalid_argument("monte_carlo_runs must be at least 1");
  if (cfg.sweep == "n_agents" && cfg.scenario != "formation") {
    throw std::invalid_argument("n_agents sweep requires the formation scenario");
  }
  if (!is_builtin_scenario(cfg.scenario) && cfg.sweep == "T") {
    throw std::invalid_argument("a model file has a fixed horizon; sweep T is not available");
  }
  if (cfg.jobs == 0) throw std::invalid_argument("jobs must be at least 1");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"scenario", c.scenario},
                      {"heterogeneous", c.heterogeneous},
                      {"sweep", c.sweep},
                      {"sweep_values", c.sweep_values},
                      {"methods", c.methods},
                      {"monte_carlo_runs", c.runs},
                      {"seed", c.seed},
                      {"output", c.output},
                      {"normalize_by_T", c.normalize_by_T},
                      {"jobs", c.jobs},
                      {"enumeration_cap", c.enumeration_cap}};
  j["k"] = c.k ? nlohmann::json(*c.k) : nlohmann::json(nullptr);
  j["T"] = c.T ? nlohmann::json(*c.T) : nlohmann::json(nullptr);
  j["n_agents"] = c.n_agents ? nlohmann::json(*c.n_agents) : nlohmann::json(nullptr);
  j["num_landmarks"] = c.num_landmarks ? nlohmann::json(*c.num_landmarks) : nlohmann::json(nullptr);
  return j;
}

/// Reads the fields present in `j` over `base`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  auto opt = [&](const char* key, std::optional<std::size_t>& dst) {
    if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<std::size_t>();
  };
  if (j.contains("scenario")) base.scenario = j.at("scenario").get<std::string>();
  if (j.contains("heterogeneous")) base.heterogeneous = j.at("heterogeneous").get<bool>();
  if (j.contains("sweep")) base.sweep = j.at("sweep").get<std::string>();
  if (j.contains("sweep_values")) base.sweep_values = j.at("sweep_values").get<std::vector<std::size_t>>();
  if (j.contains("methods")) base.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("monte_carlo_runs")) base.runs = j.at("monte_carlo_runs").get<std::size_t>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) base.output = j.at("output").get<std::string>();
  if (j.contains("normalize_by_T")) base.normalize_by_T = j.at("normalize_by_T").get<bool>();
  if (j.contains("jobs")) base.jobs = j.at("jobs").get<std::size_t>();
  if (j.contains("enumeration_cap")) base.enumeration_cap = j.at("enumeration_cap").get<double>();
  opt("k", base.k);
  opt("T", base.T);
  opt("n_agents", base.n_agents);
  opt("num_landmarks", base.num_landmarks);
  return base;
}

/// Seed of the simulation substream for Monte Carlo run r: splitmix64(seed + r),
/// decorrelated from the instance generator seeded with seed + r.
inline std::uint64_t simulation_seed(std::uint64_t instance_seed) {
  std::uint64_t z = instance_seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

struct CellParams {
  std::size_t k = 0;
  std::size_t T = 0;
  std::size_t n_agents = 0;
};

inline CellParams cell_params(const ExperimentConfig& cfg, std::size_t value, const Scenario* file_model) {
  CellParams p;
  const bool formation = cfg.scenario == "formation";
  p.n_agents = cfg.n_agents.value_or(4);
  p.T = file_model ? file_model->system.horizon() : cfg.T.value_or(20);
  std::size_t default_k = formation ? 6 : 3;
  p.k = cfg.k.value_or(default_k);
  if (cfg.sweep == "T") p.T = value;
  if (cfg.sweep == "k") p.k = value;
  if (cfg.sweep == "n_agents") {
    p.n_agents = value;
    p.k = static_cast<std::size_t>(std::lround(1.5 * static_cast<double>(value)));
  }
  return p;
}

inline Scenario make_instance(const ExperimentConfig& cfg, const CellParams& p, std::uint64_t seed,
                              const Scenario* file_model) {
  if (file_model) return *file_model;
  if (cfg.scenario == "formation") {
    FormationConfig f;
    f.n_agents = p.n_agents;
    f.heterogeneous = cfg.heterogeneous;
    f.T = p.T;
    f.seed = seed;
    return formation_scenario(f);
  }
  UavConfig u;
  u.num_landmarks = cfg.num_landmarks.value_or(10);
  u.T = p.T;
  u.seed = seed;
  return uav_scenario(u);
}

inline SelectionReport select(const std::string& method, const Scenario& sc, const RiccatiSolution& ricc,
                              std::size_t k, std::uint64_t seed, double cap) {
  if (method == "slqg") return greedy_select(sc.system, ricc, sc.ground, k);
  if (method == "optimal") return brute_force_select(sc.system, ricc, sc.ground, k, cap);
  if (method == "logdet") return logdet_select(sc.system, ricc, sc.ground, k);
  if (method == "random") return pseudo_random_select(sc.system, ricc, sc.ground, k, seed, sc.mandatory_tags);
  if (method == "allSensors") return all_sensors_select(sc.system, ricc, sc.ground);
  throw std::invalid_argument("unknown method '" + method + "'");
}

inline std::string scenario_label(const ExperimentConfig& cfg) {
  if (cfg.scenario == "formation") return cfg.heterogeneous ? "formation-heterogeneous" : "formation-homogeneous";
  return cfg.scenario;
}

inline ExperimentRow run_cell(const ExperimentConfig& cfg, std::size_t value, const std::string& method,
                              const Scenario* file_model) {
  const CellParams p = cell_params(cfg, value, file_model);
  ExperimentRow row;
  row.scenario = scenario_label(cfg);
  row.sweep_param = cfg.sweep;
  row.sweep_value = value;
  row.method = method;
  row.k = p.k;
  row.T = p.T;
  row.runs = cfg.runs;
  row.seed = cfg.seed;

  std::optional<SensorSet> cached;  // deterministic selections on a fixed model
  double analytic = 0.0;
  std::vector<double> costs;
  costs.reserve(cfg.runs);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const std::uint64_t instance_seed = cfg.seed + r;
    const Scenario sc = make_instance(cfg, p, instance_seed, file_model);
    row.n = sc.system.state_dim();
    const RiccatiSolution ricc = backward_riccati(sc.system);
    SensorSet chosen;
    double g = 0.0;
    if (cached) {
      chosen = *cached;
      g = expected_lqg_cost(sc.system, ricc, sc.ground, chosen);
    } else {
      const SelectionReport rep = select(method, sc, ricc, p.k, instance_seed, cfg.enumeration_cap);
      chosen = rep.chosen;
      g = rep.g;
      if (file_model && method != "random") cached = chosen;
    }
    analytic += g;
    const MonteCarloReport mc = simulate(sc.system, ricc, sc.ground, chosen, 1, simulation_seed(instance_seed));
    costs.push_back(mc.per_run_costs.front());
  }
  const double runs = static_cast<double>(cfg.runs);
  row.analytic_cost = analytic / runs;
  double sum = 0.0;
  for (double c : costs) sum += c;
  row.mc_mean = sum / runs;
  if (cfg.runs > 1) {
    double ss = 0.0;
    for (double c : costs) ss += (c - row.mc_mean) * (c - row.mc_mean);
    row.mc_stderr = std::sqrt(ss / (runs - 1.0)) / std::sqrt(runs);
  }
  if (cfg.normalize_by_T) {
    const double T = static_cast<double>(row.T);
    row.analytic_cost /= T;
    row.mc_mean /= T;
    row.mc_stderr /= T;
  }
  return row;
}

}  // namespace detail

/// Every (sweep value, method) cell. Rows come back in sweep-value-major,
/// method-minor order regardless of how many jobs ran them.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::optional<Scenario> file_model;
  if (!is_builtin_scenario(cfg.scenario)) file_model = io::load_scenario(cfg.scenario);
  const Scenario* model = file_model ? &*file_model : nullptr;

  struct Cell {
    std::size_t value;
    std::string method;
    std::optional<ExperimentRow> row;
    std::string error;
    bool skipped = false;
  };
  std::vector<Cell> cells;
  ExperimentResult result;
  for (std::size_t v : cfg.sweep_values) {
    for (const auto& m : cfg.methods) {
      Cell c{v, m, std::nullopt, {}, false};
      if (m == "optimal") {
        const auto p = detail::cell_params(cfg, v, model);
        const std::size_t ground_size =
            model ? model->ground.size()
                  : (cfg.scenario == "formation" ? (p.n_agents + p.n_agents * p.n_agents) / 2
                                                 : 2 + cfg.num_landmarks.value_or(10));
        if (p.k > ground_size || detail::binomial(ground_size, p.k) > cfg.enumeration_cap) {
          c.skipped = true;
          result.skipped.push_back("optimal at " + cfg.sweep + "=" + std::to_string(v) +
                                   ": instance too large for enumeration");
        }
      }
      cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& c = cells[i];
      if (c.skipped) continue;
      try {
        c.row = detail::run_cell(cfg, c.value, c.method, model);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const std::size_t jobs = std::min(cfg.jobs, std::max<std::size_t>(cells.size(), 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& c : cells) {
    if (c.row) result.rows.push_back(std::move(*c.row));
    if (!c.error.empty()) {
      result.failed.push_back(c.method + " at " + cfg.sweep + "=" + std::to_string(c.value) + ": " + c.error);
    }
  }
  return result;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.sweep_param << ',' << r.sweep_value << ',' << r.method << ',' << r.k << ','
        << r.T << ',' << r.n << ',' << format_double(r.analytic_cost) << ',' << format_double(r.mc_mean) << ','
        << format_double(r.mc_stderr) << ',' << r.runs << ',' << r.seed << '\n';
  }
  return out.str();
}

inline std::string manifest_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".manifest.json";
}

inline nlohmann::json manifest(const ExperimentConfig& cfg, const ExperimentResult& res) {
  return {{"version", kVersion},
          {"config", to_json(cfg)},
          {"seeds",
           {{"base", cfg.seed},
            {"instance", "seed + run_index"},
            {"simulation", "splitmix64(seed + run_index)"},
            {"generator", "std::mt19937_64 + std::normal_distribution<double>"}}},
          {"rows", res.rows.size()},
          {"skipped", res.skipped},
          {"failed", res.failed}};
}

inline void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
  std::ofstream csv(cfg.output, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + cfg.output);
  csv << to_csv(res.rows);
  std::ofstream man(manifest_path(cfg.output), std::ios::binary);
  if (!man) throw std::runtime_error("cannot write " + manifest_path(cfg.output));
  man << manifest(cfg, res).dump(2) << '\n';
}

}  // namespace slqg
