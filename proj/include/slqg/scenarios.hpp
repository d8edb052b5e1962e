#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "slqg/model.hpp"

namespace slqg {

/// A generated experiment instance.
struct Scenario {
  TimeVaryingSystem system;
  GroundSet ground;
  std::vector<std::string> mandatory_tags;
};

struct FormationConfig {
  std::size_t n_agents = 4;
  bool heterogeneous = false;
  std::size_t T = 20;
  double dt = 1.0;
  double deployment_box = 10.0;  // side of the square agents start in [m]
  std::uint64_t seed = 0;
};

struct UavConfig {
  std::size_t num_landmarks = 10;
  std::size_t T = 20;
  std::uint64_t seed = 0;
};

namespace scenarios {

inline Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  return G;
}

/// I + G G^T / n with G an n x n standard-normal draw.
inline Matrix random_initial_covariance(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix G = standard_normal(n, n, rng);
  return Matrix::Identity(n, n) + G * G.transpose() / static_cast<double>(n);
}

/// Per-axis double integrator: A = [[I, dt I], [0, I]], B = [[dt^2/2 I], [dt I]].
struct DoubleIntegrator {
  Matrix A;
  Matrix B;
};

inline DoubleIntegrator double_integrator(Eigen::Index dims, double dt) {
  DoubleIntegrator d{Matrix::Identity(2 * dims, 2 * dims), Matrix::Zero(2 * dims, dims)};
  const Matrix I = Matrix::Identity(dims, dims);
  d.A.topRightCorner(dims, dims) = dt * I;
  d.B.topRows(dims) = 0.5 * dt * dt * I;
  d.B.bottomRows(dims) = dt * I;
  return d;
}

}  // namespace scenarios

/// Team of planar double-integrator agents regulating their deviation from a
/// target formation. Sensors: one GPS per agent, one relative-position lidar
/// per unordered agent pair.
inline Scenario formation_scenario(const FormationConfig& cfg) {
  if (cfg.n_agents < 2) throw std::invalid_argument("formation needs at least 2 agents");
  if (cfg.T < 1) throw std::invalid_argument("horizon must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");

  const auto na = static_cast<Eigen::Index>(cfg.n_agents);
  const Eigen::Index n = 4 * na;
  const Eigen::Index m = 2 * na;
  const auto agent = scenarios::double_integrator(2, cfg.dt);

  Matrix A = Matrix::Zero(n, n);
  Matrix B = Matrix::Zero(n, m);
  Matrix W = Matrix::Zero(n, n);
  Matrix Q = Matrix::Zero(n, n);
  Vector w_diag(4);
  w_diag << 1e-2, 1e-2, 1e-4, 1e-4;
  for (Eigen::Index i = 0; i < na; ++i) {
    A.block(4 * i, 4 * i, 4, 4) = agent.A;
    B.block(4 * i, 2 * i, 4, 2) = agent.B;
    W.block(4 * i, 4 * i, 4, 4) = w_diag.asDiagonal();
    const double q = (cfg.heterogeneous && i == 0) ? 10.0 : 0.1;
    Q.block(4 * i, 4 * i, 4, 4) = q * Matrix::Identity(4, 4);
  }
  const Matrix R = Matrix::Identity(m, m);

  std::mt19937_64 rng(cfg.seed);
  const Matrix sigma = scenarios::random_initial_covariance(n, rng);
  TimeVaryingSystem sys = TimeVaryingSystem::time_invariant(A, B, W, Q, R, sigma, cfg.T);

  std::vector<Sensor> sensors;
  SensorId id = 0;
  const Matrix I2 = Matrix::Identity(2, 2);
  for (Eigen::Index i = 0; i < na; ++i) {
    Matrix C = Matrix::Zero(2, n);
    C.block(0, 4 * i, 2, 2) = I2;
    sensors.push_back(Sensor::time_invariant(id++, C, 2.0 * I2, cfg.T, "gps"));
  }
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = i + 1; j < na; ++j) {
      Matrix C = Matrix::Zero(2, n);
      C.block(0, 4 * j, 2, 2) = I2;
      C.block(0, 4 * i, 2, 2) = -I2;
      sensors.push_back(Sensor::time_invariant(id++, C, 0.1 * I2, cfg.T, "lidar"));
    }
  }
  GroundSet ground(sys, std::move(sensors));
  return Scenario{std::move(sys), std::move(ground), {"gps"}};
}

/// 3D double-integrator UAV landing at the origin with GPS, altimeter and
/// landmark (stereo) sensors.
inline Scenario uav_scenario(const UavConfig& cfg) {
  if (cfg.T < 1) throw std::invalid_argument("horizon must be positive");
  const auto di = scenarios::double_integrator(3, 1.0);
  const Matrix W = Matrix::Identity(6, 6);
  Vector q(6);
  q << 1e-3, 1e-3, 10, 1e-3, 1e-3, 10;
  const Matrix Q = q.asDiagonal();
  const Matrix R = Matrix::Identity(3, 3);

  std::mt19937_64 rng(cfg.seed);
  const Matrix sigma = scenarios::random_initial_covariance(6, rng);
  TimeVaryingSystem sys = TimeVaryingSystem::time_invariant(di.A, di.B, W, Q, R, sigma, cfg.T);

  std::vector<Sensor> sensors;
  Matrix gps = Matrix::Zero(3, 6);
  gps.leftCols(3) = Matrix::Identity(3, 3);
  sensors.push_back(Sensor::time_invariant(0, gps, 2.0 * Matrix::Identity(3, 3), cfg.T, "gps"));

  Matrix alt = Matrix::Zero(1, 6);
  alt(0, 2) = 1.0;
  sensors.push_back(Sensor::time_invariant(1, alt, Matrix::Constant(1, 1, 0.25), cfg.T, "altimeter"));

  const Matrix landmark = -gps;
  for (std::size_t l = 0; l < cfg.num_landmarks; ++l) {
    const Matrix G = scenarios::standard_normal(3, 3, rng);
    const Matrix V = 0.25 * Matrix::Identity(3, 3) + G * G.transpose() / 3.0;
    sensors.push_back(Sensor::time_invariant(static_cast<SensorId>(2 + l), landmark, V, cfg.T, "landmark"));
  }
  GroundSet ground(sys, std::move(sensors));
  return Scenario{std::move(sys), std::move(ground), {"gps"}};
}

}  // namespace slqg
