#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "slqg/kalman.hpp"
#include "slqg/linalg.hpp"
#include "slqg/model.hpp"
#include "slqg/riccati.hpp"

namespace slqg {

// Run r of a simulation with seed s draws every random quantity from
// std::mt19937_64(s + r) through std::normal_distribution<double>, in the order
// x_1, v_1, then per step w_t, v_{t+1}.
using SimEngine = std::mt19937_64;

enum class ControlLaw {
  kalman_feedback,  // u_t = K_t xhat_t
  perfect_state,    // u_t = K_t x_t
  zero,             // u_t = 0
};

struct SimOptions {
  /// Fixes x_1 instead of sampling it; the estimator prior mean is set to it too.
  std::optional<Vector> initial_state;
};

struct MonteCarloReport {
  std::size_t runs = 0;
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::vector<double> per_run_costs;
  std::uint64_t seed = 0;
  SensorSet sensor_set;
};

namespace detail {

inline Vector sample(const Matrix& factor, SimEngine& rng) {
  std::normal_distribution<double> normal;
  Vector z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return factor * z;
}

}  // namespace detail

inline MonteCarloReport simulate_policy(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                        const GroundSet& ground, const SensorSet& s, ControlLaw law,
                                        std::size_t runs, std::uint64_t seed, const SimOptions& opts = {}) {
  if (runs == 0) throw std::invalid_argument("runs must be at least 1");
  ground.check(s);
  const std::size_t T = sys.horizon();
  const Eigen::Index n = sys.state_dim();
  if (opts.initial_state && opts.initial_state->size() != n) {
    throw std::invalid_argument("initial state dimension mismatch");
  }

  std::vector<StackedMeasurement> meas;
  std::vector<Matrix> meas_factor;
  std::vector<Matrix> proc_factor;
  for (std::size_t t = 0; t < T; ++t) {
    meas.push_back(stack_measurement(ground, s, t));
    if (meas.back().C.cols() == 0) meas.back().C.resize(0, n);
    meas_factor.push_back(linalg::psd_factor(meas.back().V));
    proc_factor.push_back(linalg::psd_factor(sys.W(t)));
  }
  const Matrix init_factor = linalg::psd_factor(sys.sigma_1_0());

  MonteCarloReport rep;
  rep.runs = runs;
  rep.seed = seed;
  rep.sensor_set = s;
  rep.per_run_costs.reserve(runs);

  for (std::size_t r = 0; r < runs; ++r) {
    SimEngine rng(seed + r);
    Vector x = opts.initial_state ? *opts.initial_state : detail::sample(init_factor, rng);
    const Vector prior_mean = opts.initial_state ? *opts.initial_state : Vector(Vector::Zero(n));

    Vector y = meas[0].C * x + detail::sample(meas_factor[0], rng);
    auto est = kalman::joseph_update(prior_mean, sys.sigma_1_0(), meas[0].C, meas[0].V, y);

    double cost = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      Vector u;
      switch (law) {
        case ControlLaw::kalman_feedback: u = ricc.K[t] * est.x; break;
        case ControlLaw::perfect_state: u = ricc.K[t] * x; break;
        case ControlLaw::zero: u = Vector::Zero(sys.input_dim()); break;
      }
      const Vector x_next = sys.A(t) * x + sys.B(t) * u + detail::sample(proc_factor[t], rng);
      cost += x_next.dot(sys.Q(t) * x_next) + u.dot(sys.R(t) * u);
      x = x_next;
      if (t + 1 < T) {
        const Vector x_pred = sys.A(t) * est.x + sys.B(t) * u;
        const Matrix P_pred = linalg::symmetrize(sys.A(t) * est.Sigma * sys.A(t).transpose() + sys.W(t));
        y = meas[t + 1].C * x + detail::sample(meas_factor[t + 1], rng);
        est = kalman::joseph_update(x_pred, P_pred, meas[t + 1].C, meas[t + 1].V, y);
      }
    }
    rep.per_run_costs.push_back(cost);
  }

  double sum = 0.0;
  for (double c : rep.per_run_costs) sum += c;
  rep.mean_cost = sum / static_cast<double>(runs);
  if (runs > 1) {
    double ss = 0.0;
    for (double c : rep.per_run_costs) ss += (c - rep.mean_cost) * (c - rep.mean_cost);
    rep.std_error = std::sqrt(ss / static_cast<double>(runs - 1)) / std::sqrt(static_cast<double>(runs));
  }
  return rep;
}

/// Closed-loop LQG: Kalman estimate from the active sensors, u_t = K_t xhat_t.
inline MonteCarloReport simulate(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground,
                                 const SensorSet& s, std::size_t runs, std::uint64_t seed,
                                 const SimOptions& opts = {}) {
  return simulate_policy(sys, ricc, ground, s, ControlLaw::kalman_feedback, runs, seed, opts);
}

}  // namespace slqg
