#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slqg/kalman.hpp"
#include "slqg/linalg.hpp"
#include "slqg/model.hpp"
#include "slqg/riccati.hpp"
#include "slqg/selection.hpp"

namespace slqg {

inline constexpr std::size_t kMaxExactGammaSensors = 10;

struct GammaExact {
  double gamma = 1.0;      // clamped to [0, 1]
  double raw_min = 1.0;    // unclamped minimum ratio (may exceed 1 for strictly supermodular f)
  bool vacuous = false;    // no (A, x, x') triple with a usable denominator
  std::size_t evaluated = 0;
  std::size_t degenerate = 0;  // skipped 0/0-type triples
};

struct GammaLowerBound {
  double value = 0.0;
  bool theta_condition = false;
  bool unit_frobenius = false;     // every normalized C_{i,t} has unit Frobenius norm
  bool trace_hypothesis = false;   // tr Sigma_{t|t}(0) <= lambda_max^2 Sigma_{t|t}(0) for all t
  double theta_ratio = 0.0;
  double covariance_ratio = 0.0;
  double measurement_ratio = 0.0;
};

struct ConditionCheck {
  bool holds = false;
  double margin = 0.0;  // lambda_min of the tested matrix
  double scale = 0.0;   // lambda_max of the matrix the margin is measured against
};

struct IdentityResiduals {
  double theta_identity = 0.0;  // max over t of the Theta_t identity residual
  double telescoping = 0.0;
  std::vector<double> theta_identity_per_step;
};

struct SuboptimalityReport {
  SensorSet greedy_set;
  SensorSet optimal_set;
  double h_greedy = 0.0;
  double g_star = 0.0;
  double g_empty = 0.0;
  std::optional<double> ratio;  // absent when g(empty) == g*
  bool degenerate = false;
  std::optional<double> bound_exact;
  double bound_lower = 1.0;
};

struct GammaCertificate {
  std::optional<GammaExact> gamma_exact;
  GammaLowerBound gamma_lower_bound;
  ConditionCheck theta;
  ConditionCheck system;
  double bound_value = 1.0;
  IdentityResiduals residuals;
};

/// Selection cost of every subset of the ground set, indexed by bitmask over
/// the ground set's (id-sorted) order.
inline std::vector<double> subset_costs(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                        const GroundSet& ground) {
  const std::size_t N = ground.size();
  const std::vector<SensorId> ids = ground.all().ids();
  std::vector<double> f(std::size_t{1} << N);
  for (std::size_t mask = 0; mask < f.size(); ++mask) {
    std::vector<SensorId> pick;
    for (std::size_t i = 0; i < N; ++i)
      if (mask >> i & 1U) pick.push_back(ids[i]);
    f[mask] = selection_cost(sys, ricc, ground, SensorSet(std::move(pick)));
  }
  return f;
}

/// Supermodularity ratio of the selection cost by full enumeration of (A, x, x').
inline GammaExact gamma_exact_from_costs(const std::vector<double>& f, std::size_t N) {
  GammaExact out;
  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  const double eps = 1e-12 * scale;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t A = 0; A < f.size(); ++A) {
    for (std::size_t x = 0; x < N; ++x) {
      if (A >> x & 1U) continue;
      const double num = f[A] - f[A | std::size_t{1} << x];
      for (std::size_t xp = 0; xp < N; ++xp) {
        if (xp == x || (A >> xp & 1U)) continue;
        const std::size_t Ax = A | std::size_t{1} << xp;
        const double den = f[Ax] - f[Ax | std::size_t{1} << x];
        if (den <= eps) {
          ++out.degenerate;
          continue;
        }
        ++out.evaluated;
        best = std::min(best, num <= eps ? 0.0 : num / den);
      }
    }
  }
  if (out.evaluated == 0) {
    out.vacuous = true;
    return out;
  }
  out.raw_min = best;
  out.gamma = std::clamp(best, 0.0, 1.0);
  return out;
}

inline GammaExact gamma_exact(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground) {
  if (ground.size() > kMaxExactGammaSensors) {
    throw std::invalid_argument("ground set too large for exact supermodularity ratio (" +
                                std::to_string(ground.size()) + " > " + std::to_string(kMaxExactGammaSensors) + ")");
  }
  return gamma_exact_from_costs(subset_costs(sys, ricc, ground), ground.size());
}

inline ConditionCheck check_theta_condition(const RiccatiSolution& ricc) {
  const Vector ev = linalg::eigenvalues(ricc.theta_sum());
  ConditionCheck c;
  c.margin = ev.minCoeff();
  c.scale = std::max(ev.maxCoeff(), 0.0);
  c.holds = c.margin > linalg::pd_tolerance(c.scale);
  return c;
}

/// sum_t (A_t ... A_1)^T Q_t (A_t ... A_1): zero-control cost weight of x_1.
inline Matrix zero_control_weight(const TimeVaryingSystem& sys) {
  const Eigen::Index n = sys.state_dim();
  Matrix L = Matrix::Zero(n, n);
  Matrix Phi = Matrix::Identity(n, n);
  for (std::size_t t = 0; t < sys.horizon(); ++t) {
    Phi = sys.A(t) * Phi;
    L += Phi.transpose() * sys.Q(t) * Phi;
  }
  return linalg::symmetrize(L);
}

/// Whether zero control is strictly suboptimal for every nonzero x_1 in the
/// noiseless perfect-information problem: lambda_min(L - N_1) > 0.
inline ConditionCheck check_system_condition(const TimeVaryingSystem& sys, const RiccatiSolution& ricc) {
  const Matrix L = zero_control_weight(sys);
  ConditionCheck c;
  c.margin = linalg::min_eigenvalue(L - ricc.N.front());
  c.scale = std::max(linalg::max_eigenvalue(L), 0.0);
  c.holds = c.margin > linalg::pd_tolerance(c.scale);
  return c;
}

inline GammaLowerBound gamma_lower_bound(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                         const GroundSet& ground) {
  GammaLowerBound b;
  const ConditionCheck theta = check_theta_condition(ricc);
  b.theta_condition = theta.holds;

  const CovarianceTrajectory none = covariance_trajectory(sys, ground, SensorSet{});
  const CovarianceTrajectory all = covariance_trajectory(sys, ground, ground.all());
  const std::size_t T = sys.horizon();

  b.trace_hypothesis = true;
  double min_all = std::numeric_limits<double>::infinity();
  double max_none = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double lmax_none = linalg::max_eigenvalue(none.filtered[t]);
    if (none.filtered[t].trace() > lmax_none * lmax_none) b.trace_hypothesis = false;
    max_none = std::max(max_none, lmax_none);
    min_all = std::min(min_all, linalg::min_eigenvalue(all.filtered[t]));
  }

  b.unit_frobenius = !ground.empty();
  double min_proj_all = std::numeric_limits<double>::infinity();
  double max_proj_none = 0.0;
  for (const Sensor& sensor : ground) {
    for (std::size_t t = 0; t < T; ++t) {
      const Matrix Cn = normalized_measurement(sensor, t);
      if (std::abs(Cn.squaredNorm() - 1.0) > 1e-9) b.unit_frobenius = false;
      min_proj_all = std::min(min_proj_all, linalg::min_eigenvalue(Cn * all.filtered[t] * Cn.transpose()));
      max_proj_none = std::max(max_proj_none, linalg::max_eigenvalue(Cn * none.filtered[t] * Cn.transpose()));
    }
  }

  if (!b.theta_condition || ground.empty()) return b;
  const Vector ev = linalg::eigenvalues(ricc.theta_sum());
  b.theta_ratio = ev.minCoeff() / ev.maxCoeff();
  b.covariance_ratio = (min_all * min_all) / (max_none * max_none);
  b.measurement_ratio = (1.0 + min_proj_all) / (2.0 + max_proj_none);
  b.value = std::clamp(b.theta_ratio * b.covariance_ratio * b.measurement_ratio, 0.0, 1.0);
  return b;
}

namespace detail {

// |lhs - rhs| relative to the total magnitude of the terms, so cancellation in
// the right-hand side does not inflate the residual.
inline double term_residual(const Matrix& lhs, const Matrix& rhs, double term_scale) {
  const double diff = (lhs - rhs).norm();
  return term_scale > 0.0 ? diff / term_scale : diff;
}

}  // namespace detail

inline IdentityResiduals verify_identities(const TimeVaryingSystem& sys, const RiccatiSolution& ricc) {
  IdentityResiduals r;
  const std::size_t T = sys.horizon();
  for (std::size_t t = 1; t < T; ++t) {
    const Matrix ASA = sys.A(t).transpose() * ricc.S[t] * sys.A(t);
    const Matrix rhs = ASA + sys.Q(t - 1) - ricc.S[t - 1];
    const double scale = ricc.Theta[t].norm() + ASA.norm() + sys.Q(t - 1).norm() + ricc.S[t - 1].norm();
    const double res = detail::term_residual(ricc.Theta[t], rhs, scale);
    r.theta_identity_per_step.push_back(res);
    r.theta_identity = std::max(r.theta_identity, res);
  }
  const Eigen::Index n = sys.state_dim();
  Matrix lhs = Matrix::Zero(n, n);
  Matrix Phi = Matrix::Identity(n, n);
  for (std::size_t t = 0; t < T; ++t) {
    lhs += Phi.transpose() * ricc.Theta[t] * Phi;
    Phi = sys.A(t) * Phi;
  }
  const Matrix L = zero_control_weight(sys);
  r.telescoping =
      detail::term_residual(lhs, L - ricc.N.front(), lhs.norm() + L.norm() + ricc.N.front().norm());
  return r;
}

/// Greedy-vs-optimal gap (h - g*) / (g(empty) - g*) next to the exp(-gamma) bounds.
inline SuboptimalityReport suboptimality_report(const TimeVaryingSystem& sys, const RiccatiSolution& ricc,
                                                const GroundSet& ground, std::size_t k,
                                                double enumeration_cap = kDefaultEnumerationCap) {
  SuboptimalityReport r;
  const SelectionReport greedy = greedy_select(sys, ricc, ground, k);
  const SelectionReport optimal = brute_force_select(sys, ricc, ground, k, enumeration_cap);
  r.greedy_set = greedy.chosen;
  r.optimal_set = optimal.chosen;
  r.h_greedy = greedy.g;
  r.g_star = optimal.g;
  r.g_empty = expected_lqg_cost(sys, ricc, ground, SensorSet{});
  const double gap = r.g_empty - r.g_star;
  if (std::abs(gap) <= 1e-12 * std::max(std::abs(r.g_empty), 1.0)) {
    r.degenerate = true;
  } else {
    r.ratio = (r.h_greedy - r.g_star) / gap;
  }
  if (ground.size() <= kMaxExactGammaSensors) r.bound_exact = std::exp(-gamma_exact(sys, ricc, ground).gamma);
  r.bound_lower = std::exp(-gamma_lower_bound(sys, ricc, ground).value);
  return r;
}

inline GammaCertificate certify(const TimeVaryingSystem& sys, const RiccatiSolution& ricc, const GroundSet& ground) {
  GammaCertificate c;
  if (ground.size() <= kMaxExactGammaSensors) c.gamma_exact = gamma_exact(sys, ricc, ground);
  c.gamma_lower_bound = gamma_lower_bound(sys, ricc, ground);
  c.theta = check_theta_condition(ricc);
  c.system = check_system_condition(sys, ricc);
  c.bound_value = std::exp(-(c.gamma_exact ? c.gamma_exact->gamma : c.gamma_lower_bound.value));
  c.residuals = verify_identities(sys, ricc);
  return c;
}

}  // namespace slqg
