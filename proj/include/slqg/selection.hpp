#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slqg/kalman.hpp"
#include "slqg/model.hpp"
#include "slqg/riccati.hpp"

namespace slqg {

enum class Policy { greedy_lqg, brute_force, logdet, pseudo_random, all_sensors };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::greedy_lqg: return "greedy_lqg";
    case Policy::brute_force: return "brute_force";
    case Policy::logdet: return "logdet";
    case Policy::pseudo_random: return "pseudo_random";
    case Policy::all_sensors: return "all_sensors";
  }
  return "unknown";
}

struct SelectionStep {
  SensorId added;
  double cost;  // objective value after the addition
};

struct SelectionReport {
  SensorSet chosen;
  double J = 0.0;  // sum_t tr(Theta_t Sigma_{t|t}(S))
  double g = 0.0;  // expected LQG cost of S
  std::vector<SelectionStep> iterations;
  Policy policy = Policy::greedy_lqg;
};

inline constexpr double kDefaultEnumerationCap = 2e5;

/// sum_t tr(Theta_t Sigma_{t|t}(S)).
inline double selection_cost(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground,
                             const SensorSet& s) {
  const CovarianceTrajectory traj = covariance_trajectory(sys, ground, s);
  double J = 0.0;
  for (std::size_t t = 0; t < traj.filtered.size(); ++t) {
    J += ricc.Theta[t].cwiseProduct(traj.filtered[t]).sum();
  }
  return J;
}

/// tr(N_1 Sigma_{1|0}) + sum_t tr(W_t S_t): the part of the LQG cost no sensor can change.
inline double sensor_independent_cost(const TimeVaryingSystem& sys, const RiccatiSolution& ricc) {
  double c = ricc.N.front().cwiseProduct(sys.sigma_1_0()).sum();
  for (std::size_t t = 0; t < sys.horizon(); ++t) c += sys.W(t).cwiseProduct(ricc.S[t]).sum();
  return c;
}

inline double expected_lqg_cost(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground,
                                const SensorSet& s) {
  return sensor_independent_cost(sys, ricc) + selection_cost(sys, ricc, ground, s);
}

/// Mean over the horizon of logdet Sigma_{t|t}(S). -inf if some Sigma_{t|t} is singular.
inline double average_logdet(const TimeVaryingSystem& sys, const GroundSet& ground, const SensorSet& s) {
  const CovarianceTrajectory traj = covariance_trajectory(sys, ground, s);
  double total = 0.0;
  for (const Matrix& P : traj.filtered) {
    Eigen::LLT<Matrix> llt(P);
    if (llt.info() == Eigen::Success) {
      total += 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    } else {
      const Vector ev = linalg::eigenvalues(P);
      if (ev.minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
      total += ev.array().log().sum();
    }
  }
  return total / static_cast<double>(traj.filtered.size());
}

namespace detail {

inline void check_budget(const GroundSet& ground, std::size_t k) {
  if (k > ground.size()) throw std::invalid_argument("budget exceeds ground set");
}

/// k rounds of: evaluate every remaining candidate, add the minimizer. Candidates
/// are scanned in increasing id order and only a strictly smaller cost replaces
/// the incumbent, so ties go to the smallest id.
template <typename Objective>
std::pair<SensorSet, std::vector<SelectionStep>> greedy(const GroundSet& ground, std::size_t k, Objective&& cost) {
  check_budget(ground, k);
  SensorSet chosen;
  std::vector<SelectionStep> steps;
  for (std::size_t round = 0; round < k; ++round) {
    SensorId best_id = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const Sensor& sensor : ground) {
      if (chosen.contains(sensor.id())) continue;
      const double c = cost(chosen.with(sensor.id()));
      if (!found || c < best) {
        best = c;
        best_id = sensor.id();
        found = true;
      }
    }
    chosen = chosen.with(best_id);
    steps.push_back({best_id, best});
  }
  return {std::move(chosen), std::move(steps)};
}

inline SelectionReport finish(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground,
                              SensorSet chosen, std::vector<SelectionStep> steps, Policy policy) {
  SelectionReport r;
  r.J = selection_cost(sys, ricc, ground, chosen);
  r.g = sensor_independent_cost(sys, ricc) + r.J;
  r.chosen = std::move(chosen);
  r.iterations = std::move(steps);
  r.policy = policy;
  return r;
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double b = 1.0;
  for (std::size_t i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(b);
}

}  // namespace detail

/// Greedy control-aware selection: each round recomputes the full covariance
/// recursion for every candidate and keeps the one with the smallest
/// sum_t tr(Theta_t Sigma_{t|t}).
inline SelectionReport greedy_select(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                     const GroundSet& ground, std::size_t k) {
  auto [chosen, steps] =
      detail::greedy(ground, k, [&](const SensorSet& s) { return selection_cost(sys, ricc, ground, s); });
  return detail::finish(sys, ricc, ground, std::move(chosen), std::move(steps), Policy::greedy_lqg);
}

inline bool enumeration_feasible(const GroundSet& ground, std::size_t k, double cap = kDefaultEnumerationCap) {
  return k <= ground.size() && detail::binomial(ground.size(), k) <= cap;
}

/// Exact minimizer of selection_cost over all subsets of size exactly k; ties go
/// to the lexicographically smallest id list.
inline SelectionReport brute_force_select(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                          const GroundSet& ground, std::size_t k,
                                          double enumeration_cap = kDefaultEnumerationCap) {
  detail::check_budget(ground, k);
  if (detail::binomial(ground.size(), k) > enumeration_cap) {
    throw std::invalid_argument("instance too large for enumeration");
  }
  const std::vector<SensorId> ids = ground.all().ids();
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;

  SensorSet best_set;
  double best = std::numeric_limits<double>::infinity();
  bool first = true;
  while (true) {
    std::vector<SensorId> pick;
    pick.reserve(k);
    for (std::size_t i : idx) pick.push_back(ids[i]);
    SensorSet s(std::move(pick));
    const double c = selection_cost(sys, ricc, ground, s);
    if (first || c < best) {
      best = c;
      best_set = std::move(s);
      first = false;
    }
    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == ids.size() - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return detail::finish(sys, ricc, ground, std::move(best_set), {}, Policy::brute_force);
}

/// Control-agnostic greedy baseline minimizing the average logdet of Sigma_{t|t}.
inline SelectionReport logdet_select(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                     const GroundSet& ground, std::size_t k) {
  auto [chosen, steps] =
      detail::greedy(ground, k, [&](const SensorSet& s) { return average_logdet(sys, ground, s); });
  return detail::finish(sys, ricc, ground, std::move(chosen), std::move(steps), Policy::logdet);
}

inline SelectionReport logdet_select(const TimeVaryingSystem& sys, const GroundSet& ground, std::size_t k) {
  return logdet_select(sys, backward_riccati(sys), ground, k);
}

/// All sensors with a mandatory tag, plus a seeded uniform sample of the rest.
inline SelectionReport pseudo_random_select(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                            const GroundSet& ground, std::size_t k, std::uint64_t seed,
                                            const std::vector<std::string>& mandatory_tags = {"gps"}) {
  detail::check_budget(ground, k);
  const std::set<std::string> tags(mandatory_tags.begin(), mandatory_tags.end());
  std::vector<SensorId> mandatory;
  std::vector<SensorId> rest;
  for (const Sensor& s : ground) (tags.count(s.tag()) ? mandatory : rest).push_back(s.id());
  if (mandatory.size() > k) {
    throw std::invalid_argument("mandatory sensors (" + std::to_string(mandatory.size()) + ") exceed budget " +
                                std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(rest.begin(), rest.end(), rng);
  rest.resize(k - mandatory.size());
  mandatory.insert(mandatory.end(), rest.begin(), rest.end());
  return detail::finish(sys, ricc, ground, SensorSet(std::move(mandatory)), {}, Policy::pseudo_random);
}

inline SelectionReport all_sensors_select(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                          const GroundSet& ground) {
  return detail::finish(sys, ricc, ground, ground.all(), {}, Policy::all_sensors);
}

}  // namespace slqg
