#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slqg/linalg.hpp"

namespace slqg {

using SensorId = int;

/// Raw per-step matrices of x_{t+1} = A_t x_t + B_t u_t + w_t with cost
/// sum_t |x_{t+1}|^2_{Q_t} + |u_t|^2_{R_t}. Index t is zero-based.
struct SystemData {
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  std::vector<Matrix> W;
  std::vector<Matrix> Q;
  std::vector<Matrix> R;
  Matrix sigma_1_0;
};

namespace detail {

inline void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

inline Matrix checked_symmetric(const Matrix& m, const std::string& what) {
  if (linalg::relative_asymmetry(m) > linalg::kSymmetryTol) {
    throw std::invalid_argument(what + " is not symmetric");
  }
  return linalg::symmetrize(m);
}

inline void require_psd(const Matrix& m, const std::string& what) {
  if (!linalg::is_positive_semidefinite(m)) throw std::invalid_argument(what + " is not positive semidefinite");
}

inline void require_pd(const Matrix& m, const std::string& what) {
  if (!linalg::is_positive_definite(m)) throw std::invalid_argument(what + " is not positive definite");
}

// The prior only needs to be invertible in exact arithmetic; near-perfect priors are legitimate.
inline void require_strictly_pd(const Matrix& m, const std::string& what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || linalg::eigenvalues(m).minCoeff() <= 0.0)
    throw std::invalid_argument(what + " is not positive definite");
}

}  // namespace detail

/// Validated, immutable time-varying linear-Gaussian system over a finite horizon.
class TimeVaryingSystem {
 public:
  explicit TimeVaryingSystem(SystemData data) : data_(std::move(data)) { validate(); }

  /// Broadcasts one set of matrices over `horizon` steps.
  static TimeVaryingSystem time_invariant(const Matrix& A, const Matrix& B, const Matrix& W, const Matrix& Q,
                                          const Matrix& R, const Matrix& sigma_1_0, std::size_t horizon) {
    SystemData d;
    d.A.assign(horizon, A);
    d.B.assign(horizon, B);
    d.W.assign(horizon, W);
    d.Q.assign(horizon, Q);
    d.R.assign(horizon, R);
    d.sigma_1_0 = sigma_1_0;
    return TimeVaryingSystem(std::move(d));
  }

  std::size_t horizon() const { return data_.A.size(); }
  Eigen::Index state_dim() const { return data_.sigma_1_0.rows(); }
  Eigen::Index input_dim() const { return data_.B.front().cols(); }

  const Matrix& A(std::size_t t) const { return data_.A.at(t); }
  const Matrix& B(std::size_t t) const { return data_.B.at(t); }
  const Matrix& W(std::size_t t) const { return data_.W.at(t); }
  const Matrix& Q(std::size_t t) const { return data_.Q.at(t); }
  const Matrix& R(std::size_t t) const { return data_.R.at(t); }
  const Matrix& sigma_1_0() const { return data_.sigma_1_0; }

  const SystemData& data() const { return data_; }

 private:
  void validate() {
    const std::size_t T = data_.A.size();
    if (T == 0) throw std::invalid_argument("horizon must be positive");
    if (data_.B.size() != T || data_.W.size() != T || data_.Q.size() != T || data_.R.size() != T) {
      throw std::invalid_argument("system matrices must all have horizon " + std::to_string(T));
    }
    const Eigen::Index n = data_.sigma_1_0.rows();
    if (n == 0) throw std::invalid_argument("state dimension must be positive");
    const Eigen::Index m = data_.B.front().cols();
    if (m == 0) throw std::invalid_argument("input dimension must be positive");
    data_.sigma_1_0 = detail::checked_symmetric(data_.sigma_1_0, "sigma_1_0");
    detail::check_shape(data_.sigma_1_0, n, n, "sigma_1_0");
    detail::require_strictly_pd(data_.sigma_1_0, "sigma_1_0");
    for (std::size_t t = 0; t < T; ++t) {
      const std::string at = "[" + std::to_string(t) + "]";
      detail::check_shape(data_.A[t], n, n, "A" + at);
      detail::check_shape(data_.B[t], n, m, "B" + at);
      detail::check_shape(data_.W[t], n, n, "W" + at);
      detail::check_shape(data_.Q[t], n, n, "Q" + at);
      detail::check_shape(data_.R[t], m, m, "R" + at);
      data_.W[t] = detail::checked_symmetric(data_.W[t], "W" + at);
      data_.Q[t] = detail::checked_symmetric(data_.Q[t], "Q" + at);
      data_.R[t] = detail::checked_symmetric(data_.R[t], "R" + at);
      detail::require_psd(data_.W[t], "W" + at);
      detail::require_psd(data_.Q[t], "Q" + at);
      detail::require_pd(data_.R[t], "R" + at);
    }
  }

  SystemData data_;
};

/// One candidate sensor y_t = C_t x_t + v_t, v_t ~ N(0, V_t).
class Sensor {
 public:
  Sensor(SensorId id, std::vector<Matrix> C, std::vector<Matrix> V, std::string tag = {})
      : id_(id), tag_(std::move(tag)), C_(std::move(C)), V_(std::move(V)) {
    if (C_.empty() || C_.size() != V_.size()) {
      throw std::invalid_argument("sensor " + std::to_string(id_) + ": C and V must cover the same nonempty horizon");
    }
    const Eigen::Index p = C_.front().rows();
    const Eigen::Index n = C_.front().cols();
    if (p == 0) throw std::invalid_argument("sensor " + std::to_string(id_) + ": measurement dimension is zero");
    info_.reserve(C_.size());
    for (std::size_t t = 0; t < C_.size(); ++t) {
      const std::string at = "sensor " + std::to_string(id_) + " [" + std::to_string(t) + "]";
      detail::check_shape(C_[t], p, n, "C of " + at);
      detail::check_shape(V_[t], p, p, "V of " + at);
      V_[t] = detail::checked_symmetric(V_[t], "V of " + at);
      if (!linalg::is_positive_definite(V_[t])) {
        throw std::invalid_argument("measurement noise not positive definite (" + at + ")");
      }
      info_.push_back(linalg::symmetrize(C_[t].transpose() * V_[t].llt().solve(C_[t])));
    }
  }

  static Sensor time_invariant(SensorId id, const Matrix& C, const Matrix& V, std::size_t horizon,
                               std::string tag = {}) {
    return Sensor(id, std::vector<Matrix>(horizon, C), std::vector<Matrix>(horizon, V), std::move(tag));
  }

  SensorId id() const { return id_; }
  const std::string& tag() const { return tag_; }
  std::size_t horizon() const { return C_.size(); }
  Eigen::Index rows() const { return C_.front().rows(); }
  Eigen::Index state_dim() const { return C_.front().cols(); }
  const Matrix& C(std::size_t t) const { return C_.at(t); }
  const Matrix& V(std::size_t t) const { return V_.at(t); }
  /// C_t^T V_t^{-1} C_t, cached at construction.
  const Matrix& information(std::size_t t) const { return info_.at(t); }

 private:
  SensorId id_;
  std::string tag_;
  std::vector<Matrix> C_;
  std::vector<Matrix> V_;
  std::vector<Matrix> info_;
};

/// Canonical (strictly increasing) set of sensor ids.
class SensorSet {
 public:
  SensorSet() = default;
  SensorSet(std::initializer_list<SensorId> ids) : SensorSet(std::vector<SensorId>(ids)) {}
  explicit SensorSet(std::vector<SensorId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
      throw std::invalid_argument("duplicate sensor id in sensor set");
    }
  }

  const std::vector<SensorId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(SensorId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

  bool is_subset_of(const SensorSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
  }

  SensorSet with(SensorId id) const {
    if (contains(id)) return *this;
    SensorSet out = *this;
    out.ids_.insert(std::upper_bound(out.ids_.begin(), out.ids_.end(), id), id);
    return out;
  }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  friend bool operator==(const SensorSet&, const SensorSet&) = default;
  friend auto operator<=>(const SensorSet& a, const SensorSet& b) { return a.ids_ <=> b.ids_; }

 private:
  std::vector<SensorId> ids_;
};

inline std::string to_string(const SensorSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s.ids()[i]);
  }
  return out + "}";
}

/// The candidate sensors V, validated against a system. Ids are unique.
class GroundSet {
 public:
  GroundSet() = default;
  GroundSet(const TimeVaryingSystem& sys, std::vector<Sensor> sensors) : sensors_(std::move(sensors)) {
    std::sort(sensors_.begin(), sensors_.end(), [](const Sensor& a, const Sensor& b) { return a.id() < b.id(); });
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
      const Sensor& s = sensors_[i];
      if (i > 0 && sensors_[i - 1].id() == s.id()) {
        throw std::invalid_argument("duplicate sensor id " + std::to_string(s.id()));
      }
      if (s.horizon() != sys.horizon() || s.state_dim() != sys.state_dim()) {
        throw std::invalid_argument("sensor " + std::to_string(s.id()) + " does not match system dimensions");
      }
    }
  }

  std::size_t size() const { return sensors_.size(); }
  bool empty() const { return sensors_.empty(); }
  const std::vector<Sensor>& sensors() const { return sensors_; }
  auto begin() const { return sensors_.begin(); }
  auto end() const { return sensors_.end(); }

  const Sensor* find(SensorId id) const {
    auto it = std::lower_bound(sensors_.begin(), sensors_.end(), id,
                               [](const Sensor& s, SensorId v) { return s.id() < v; });
    return (it != sensors_.end() && it->id() == id) ? &*it : nullptr;
  }

  const Sensor& at(SensorId id) const {
    const Sensor* s = find(id);
    if (!s) throw std::invalid_argument("sensor not in ground set (id " + std::to_string(id) + ")");
    return *s;
  }

  SensorSet all() const {
    std::vector<SensorId> ids;
    ids.reserve(sensors_.size());
    for (const auto& s : sensors_) ids.push_back(s.id());
    return SensorSet(std::move(ids));
  }

  void check(const SensorSet& s) const {
    for (SensorId id : s) at(id);
  }

 private:
  std::vector<Sensor> sensors_;
};

struct StackedMeasurement {
  Matrix C;  // sum_i p_i x n
  Matrix V;  // block diagonal
};

/// Row-stacks C_{i,t} and block-diagonalizes V_{i,t} in increasing id order.
inline StackedMeasurement stack_measurement(const GroundSet& ground, const SensorSet& s, std::size_t t) {
  Eigen::Index rows = 0;
  Eigen::Index n = 0;
  for (SensorId id : s) {
    const Sensor& sensor = ground.at(id);
    if (t >= sensor.horizon()) throw std::out_of_range("time index " + std::to_string(t) + " outside horizon");
    rows += sensor.rows();
    n = sensor.state_dim();
  }
  if (s.empty() && !ground.empty()) {
    if (t >= ground.sensors().front().horizon()) {
      throw std::out_of_range("time index " + std::to_string(t) + " outside horizon");
    }
    n = ground.sensors().front().state_dim();
  }
  StackedMeasurement out{Matrix::Zero(rows, n), Matrix::Zero(rows, rows)};
  Eigen::Index r = 0;
  for (SensorId id : s) {
    const Sensor& sensor = ground.at(id);
    const Eigen::Index p = sensor.rows();
    out.C.middleRows(r, p) = sensor.C(t);
    out.V.block(r, r, p, p) = sensor.V(t);
    r += p;
  }
  return out;
}

/// C-bar = V^{-1/2} C, with V^{-1/2} the inverse symmetric square root.
inline Matrix normalized_measurement(const Matrix& C, const Matrix& V) {
  if (V.rows() != V.cols() || V.rows() != C.rows()) throw std::invalid_argument("C and V dimensions disagree");
  try {
    return linalg::inverse_sqrt(V) * C;
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("measurement noise not positive definite");
  }
}

inline Matrix normalized_measurement(const Sensor& sensor, std::size_t t) {
  return normalized_measurement(sensor.C(t), sensor.V(t));
}

/// Sum over the set of C_{i,t}^T V_{i,t}^{-1} C_{i,t}.
inline Matrix information_sum(const GroundSet& ground, const SensorSet& s, std::size_t t, Eigen::Index n) {
  Matrix out = Matrix::Zero(n, n);
  for (SensorId id : s) out += ground.at(id).information(t);
  return out;
}

}  // namespace slqg
