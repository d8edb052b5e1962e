#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slqg/guarantees.hpp"
#include "slqg/model.hpp"
#include "slqg/scenarios.hpp"
#include "slqg/sim.hpp"

// Model document:
//   {T, n, m, A, B, W, Q, R, sigma_1_0,
//    sensors: [{id, tag, C, V}], mandatory_tags (optional)}
// Matrices are row-major nested arrays. A per-step field is either a list of T
// matrices or a single matrix broadcast over the horizon.

namespace slqg::io {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + ": expected a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw std::invalid_argument(what + ": ragged or malformed rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw std::invalid_argument(what + ": non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

/// A single matrix (broadcast) or a list of `horizon` matrices.
inline std::vector<Matrix> sequence_from_json(const json& j, std::size_t horizon, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + ": expected a matrix or list of matrices");
  const bool is_list = j.front().is_array() && !j.front().empty() && j.front().front().is_array();
  if (!is_list) return std::vector<Matrix>(horizon, matrix_from_json(j, what));
  if (j.size() != horizon) {
    throw std::invalid_argument(what + ": expected " + std::to_string(horizon) + " matrices, got " +
                                std::to_string(j.size()));
  }
  std::vector<Matrix> out;
  out.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) out.push_back(matrix_from_json(j[t], what + "[" + std::to_string(t) + "]"));
  return out;
}

inline json sequence_to_json(const std::vector<Matrix>& seq) {
  bool constant = true;
  for (const auto& m : seq) constant = constant && m.rows() == seq.front().rows() && m.cols() == seq.front().cols() &&
                                       m == seq.front();
  if (constant) return matrix_to_json(seq.front());
  json out = json::array();
  for (const auto& m : seq) out.push_back(matrix_to_json(m));
  return out;
}

inline json scenario_to_json(const Scenario& sc) {
  const auto& sys = sc.system;
  const auto& d = sys.data();
  json j;
  j["T"] = sys.horizon();
  j["n"] = sys.state_dim();
  j["m"] = sys.input_dim();
  j["A"] = sequence_to_json(d.A);
  j["B"] = sequence_to_json(d.B);
  j["W"] = sequence_to_json(d.W);
  j["Q"] = sequence_to_json(d.Q);
  j["R"] = sequence_to_json(d.R);
  j["sigma_1_0"] = matrix_to_json(d.sigma_1_0);
  json sensors = json::array();
  for (const Sensor& s : sc.ground) {
    std::vector<Matrix> C, V;
    for (std::size_t t = 0; t < s.horizon(); ++t) {
      C.push_back(s.C(t));
      V.push_back(s.V(t));
    }
    sensors.push_back({{"id", s.id()}, {"tag", s.tag()}, {"C", sequence_to_json(C)}, {"V", sequence_to_json(V)}});
  }
  j["sensors"] = std::move(sensors);
  j["mandatory_tags"] = sc.mandatory_tags;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  for (const char* key : {"T", "A", "B", "W", "Q", "R", "sigma_1_0"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("model document is missing field '") + key + "'");
  }
  const auto T = j.at("T").get<std::size_t>();
  if (T == 0) throw std::invalid_argument("T must be positive");
  SystemData d;
  d.A = sequence_from_json(j.at("A"), T, "A");
  d.B = sequence_from_json(j.at("B"), T, "B");
  d.W = sequence_from_json(j.at("W"), T, "W");
  d.Q = sequence_from_json(j.at("Q"), T, "Q");
  d.R = sequence_from_json(j.at("R"), T, "R");
  d.sigma_1_0 = matrix_from_json(j.at("sigma_1_0"), "sigma_1_0");
  TimeVaryingSystem sys(std::move(d));
  if (j.contains("n") && j.at("n").get<Eigen::Index>() != sys.state_dim()) {
    throw std::invalid_argument("field n disagrees with the matrices");
  }
  if (j.contains("m") && j.at("m").get<Eigen::Index>() != sys.input_dim()) {
    throw std::invalid_argument("field m disagrees with the matrices");
  }

  std::vector<Sensor> sensors;
  if (j.contains("sensors")) {
    for (const auto& s : j.at("sensors")) {
      const auto id = s.at("id").get<SensorId>();
      const std::string what = "sensor " + std::to_string(id);
      sensors.emplace_back(id, sequence_from_json(s.at("C"), T, what + " C"),
                           sequence_from_json(s.at("V"), T, what + " V"), s.value("tag", std::string{}));
    }
  }
  GroundSet ground(sys, std::move(sensors));
  std::vector<std::string> tags = j.value("mandatory_tags", std::vector<std::string>{"gps"});
  return Scenario{std::move(sys), std::move(ground), std::move(tags)};
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline json to_json(const ConditionCheck& c) {
  return {{"holds", c.holds}, {"margin", c.margin}, {"scale", c.scale}};
}

inline json to_json(const GammaCertificate& c) {
  json j;
  if (c.gamma_exact) {
    j["gamma_exact"] = c.gamma_exact->gamma;
    j["gamma_exact_detail"] = {{"raw_min", c.gamma_exact->raw_min},
                               {"vacuous", c.gamma_exact->vacuous},
                               {"evaluated_triples", c.gamma_exact->evaluated},
                               {"degenerate_triples", c.gamma_exact->degenerate}};
  } else {
    j["gamma_exact"] = nullptr;
  }
  const auto& lb = c.gamma_lower_bound;
  j["gamma_lower_bound"] = lb.value;
  j["gamma_lower_bound_factors"] = {
      {"theta_ratio", lb.theta_ratio}, {"covariance_ratio", lb.covariance_ratio}, {"measurement_ratio", lb.measurement_ratio}};
  j["theta_sum_min_eig"] = c.theta.margin;
  j["system_condition_margin"] = c.system.margin;
  j["theta_condition"] = to_json(c.theta);
  j["system_condition"] = to_json(c.system);
  j["bound_value"] = c.bound_value;
  j["assumptions_met"] = {{"theta_condition", lb.theta_condition},
                          {"unit_frobenius", lb.unit_frobenius},
                          {"trace_hypothesis", lb.trace_hypothesis}};
  j["residuals"] = {{"theta_identity", c.residuals.theta_identity}, {"telescoping", c.residuals.telescoping}};
  return j;
}

inline json to_json(const SuboptimalityReport& r) {
  json j = {{"greedy_set", r.greedy_set.ids()}, {"optimal_set", r.optimal_set.ids()}, {"h_greedy", r.h_greedy},
            {"g_star", r.g_star},               {"g_empty", r.g_empty},                 {"degenerate", r.degenerate},
            {"bound_lower", r.bound_lower}};
  j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
  j["bound_exact"] = r.bound_exact ? json(*r.bound_exact) : json(nullptr);
  return j;
}

inline json to_json(const MonteCarloReport& r) {
  return {{"runs", r.runs},           {"mean_cost", r.mean_cost},         {"std_error", r.std_error},
          {"seed", r.seed},           {"sensor_set", r.sensor_set.ids()}, {"per_run_costs", r.per_run_costs}};
}

}  // namespace slqg::io
