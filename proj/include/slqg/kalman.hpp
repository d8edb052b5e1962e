#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slqg/linalg.hpp"
#include "slqg/model.hpp"

namespace slqg {

/// Sigma_{t|t-1} and Sigma_{t|t} for t = 0..T-1 under a fixed sensor set.
struct CovarianceTrajectory {
  std::vector<Matrix> predicted;
  std::vector<Matrix> filtered;
  SensorSet sensor_set;
};

struct FilterState {
  std::size_t t = 0;
  Vector x_hat;
  Matrix Sigma;
};

namespace kalman {

/// (P^{-1} + info)^{-1}; nullopt when the prior P is not numerically PD.
inline std::optional<Matrix> information_update(const Matrix& prior, const Matrix& info) {
  Eigen::LLT<Matrix> llt(prior);
  if (llt.info() != Eigen::Success) return std::nullopt;
  // Cheap stand-in for the eigenvalue test; the smallest squared pivot is an
  // upper bound on lambda_min.
  const double pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
  if (pivot * pivot <= linalg::pd_tolerance(prior.diagonal().maxCoeff())) return std::nullopt;
  const Eigen::Index n = prior.rows();
  const Matrix posterior_info = llt.solve(Matrix::Identity(n, n)) + info;
  Eigen::LLT<Matrix> post(linalg::symmetrize(posterior_info));
  if (post.info() != Eigen::Success) return std::nullopt;
  return linalg::symmetrize(post.solve(Matrix::Identity(n, n)));
}

/// P - P C^T (C P C^T + V)^{-1} C P, then PSD repair.
inline Matrix gain_update(const Matrix& prior, const Matrix& C, const Matrix& V) {
  if (C.rows() == 0) return prior;
  const Matrix PCt = prior * C.transpose();
  const Matrix innovation = linalg::symmetrize(C * PCt + V);
  Eigen::LLT<Matrix> llt(innovation);
  if (llt.info() != Eigen::Success) throw std::runtime_error("innovation covariance not positive definite");
  return linalg::repair_psd(prior - PCt * llt.solve(PCt.transpose()));
}

struct Update {
  Vector x;
  Matrix Sigma;
};

/// Mean and Joseph-form covariance update with gain L = P C^T (C P C^T + V)^{-1}.
inline Update joseph_update(const Vector& x_prior, const Matrix& prior, const Matrix& C, const Matrix& V,
                            const Vector& y) {
  if (y.size() != C.rows() || V.rows() != C.rows() || V.cols() != C.rows()) {
    throw std::invalid_argument("measurement dimension mismatch: y has " + std::to_string(y.size()) +
                                " rows, C has " + std::to_string(C.rows()));
  }
  if (C.rows() == 0) return {x_prior, prior};
  const Eigen::Index n = prior.rows();
  const Matrix PCt = prior * C.transpose();
  Eigen::LLT<Matrix> llt(linalg::symmetrize(C * PCt + V));
  if (llt.info() != Eigen::Success) throw std::runtime_error("innovation covariance not positive definite");
  const Matrix L = llt.solve(PCt.transpose()).transpose();
  const Matrix IminusLC = Matrix::Identity(n, n) - L * C;
  Update out;
  out.x = x_prior + L * (y - C * x_prior);
  out.Sigma = linalg::repair_psd(IminusLC * prior * IminusLC.transpose() + L * V * L.transpose());
  return out;
}

}  // namespace kalman

/// Kalman covariance recursion from Sigma_{1|0}. The measurement update uses the
/// information form whenever the prior is PD and falls back to the gain form.
inline CovarianceTrajectory covariance_trajectory(const TimeVaryingSystem& sys, const GroundSet& ground,
                                                  const SensorSet& s) {
  ground.check(s);
  const std::size_t T = sys.horizon();
  const Eigen::Index n = sys.state_dim();
  CovarianceTrajectory out;
  out.sensor_set = s;
  out.predicted.reserve(T);
  out.filtered.reserve(T);

  Matrix prior = sys.sigma_1_0();
  for (std::size_t t = 0; t < T; ++t) {
    out.predicted.push_back(prior);
    Matrix post;
    if (s.empty()) {
      post = prior;
    } else if (auto info = kalman::information_update(prior, information_sum(ground, s, t, n))) {
      post = std::move(*info);
    } else {
      const StackedMeasurement m = stack_measurement(ground, s, t);
      post = kalman::gain_update(prior, m.C, m.V);
    }
    prior = linalg::symmetrize(sys.A(t) * post * sys.A(t).transpose() + sys.W(t));
    out.filtered.push_back(std::move(post));
  }
  return out;
}

/// Estimate after the first measurement: prior mean `x_prior`, covariance
/// Sigma_{1|0}, updated with y at t = 0.
inline FilterState initial_filter_state(const TimeVaryingSystem& sys, const GroundSet& ground, const SensorSet& s,
                                        const Vector& x_prior, const Vector& y) {
  const StackedMeasurement m = stack_measurement(ground, s, 0);
  auto up = kalman::joseph_update(x_prior, sys.sigma_1_0(), m.C, m.V, y);
  return FilterState{0, std::move(up.x), std::move(up.Sigma)};
}

/// Predict from state.t to state.t + 1 with input u_prev, then update with y.
inline FilterState filter_step(const FilterState& state, const TimeVaryingSystem& sys, const GroundSet& ground,
                               const SensorSet& s, const Vector& u_prev, const Vector& y) {
  const std::size_t t = state.t;
  if (t + 1 >= sys.horizon()) throw std::out_of_range("filter_step past the horizon");
  if (u_prev.size() != sys.input_dim()) throw std::invalid_argument("control dimension mismatch");
  if (state.x_hat.size() != sys.state_dim()) throw std::invalid_argument("state dimension mismatch");
  const Vector x_pred = sys.A(t) * state.x_hat + sys.B(t) * u_prev;
  const Matrix P_pred = linalg::symmetrize(sys.A(t) * state.Sigma * sys.A(t).transpose() + sys.W(t));
  const StackedMeasurement m = stack_measurement(ground, s, t + 1);
  auto up = kalman::joseph_update(x_pred, P_pred, m.C, m.V, y);
  return FilterState{t + 1, std::move(up.x), std::move(up.Sigma)};
}

}  // namespace slqg
