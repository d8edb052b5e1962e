#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "slqg/linalg.hpp"
#include "slqg/model.hpp"

namespace slqg {

/// Control-side quantities of the finite-horizon LQ problem. Index t is
/// zero-based; N_{T+1} = 0 is implicit.
struct RiccatiSolution {
  std::vector<Matrix> S;      // Q_t + N_{t+1}
  std::vector<Matrix> N;      // cost-to-go weight
  std::vector<Matrix> M;      // B^T S B + R
  std::vector<Matrix> K;      // feedback gain, u_t = K_t x_t
  std::vector<Matrix> Theta;  // K^T M K

  std::size_t horizon() const { return K.size(); }

  Matrix theta_sum() const {
    Matrix out = Matrix::Zero(Theta.front().rows(), Theta.front().cols());
    for (const auto& th : Theta) out += th;
    return out;
  }
};

/// Backward recursion from N_{T+1} = 0. The cost-to-go update uses
/// N_t = A^T (S - S B M^{-1} B^T S) A, which stays valid for singular S_t.
inline RiccatiSolution backward_riccati(const TimeVaryingSystem& sys) {
  const std::size_t T = sys.horizon();
  const Eigen::Index n = sys.state_dim();
  RiccatiSolution sol;
  sol.S.resize(T);
  sol.N.resize(T);
  sol.M.resize(T);
  sol.K.resize(T);
  sol.Theta.resize(T);

  Matrix N_next = Matrix::Zero(n, n);
  for (std::size_t i = T; i-- > 0;) {
    const Matrix& A = sys.A(i);
    const Matrix& B = sys.B(i);
    const Matrix S = linalg::symmetrize(sys.Q(i) + N_next);
    const Matrix M = linalg::symmetrize(B.transpose() * S * B + sys.R(i));
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) throw std::logic_error("M_t is not positive definite");

    const Matrix SB = S * B;
    const Matrix K = -llt.solve(SB.transpose() * A);
    const Matrix Theta = linalg::symmetrize(K.transpose() * M * K);
    const Matrix N = linalg::symmetrize(A.transpose() * (S - SB * llt.solve(SB.transpose())) * A);

    sol.S[i] = S;
    sol.M[i] = M;
    sol.K[i] = K;
    sol.Theta[i] = Theta;
    sol.N[i] = N;
    N_next = N;
  }
  return sol;
}

}  // namespace slqg
