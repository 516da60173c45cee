#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace fbst {

struct ValueAndGradient {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // same shape as W
};

/// Frame regularizer
///   J1(W) = 1/2 sum_i ||w_i||^2 - sum_k log lambda_k - sum_i log ||w_i||^2,
/// where lambda_k = sum_i |(F h_i)[k]|^2 are the Gram eigenvalues on the
/// N_F x N_F grid with the orthonormal DFT (1/N_F per bin). Minimizers are
/// uniformly normalized tight frames with ||w_i||^2 = 2(1 + N_F^2/N_c) and
/// lambda_k = 2(1 + N_c/N_F^2).
///
/// Returns value +inf (and a zero gradient) when a row is zero or some
/// lambda_k vanishes, so a line search treats the point as infeasible.
ValueAndGradient j1_value_grad(const Eigen::MatrixXd& weights, std::size_t fft_size);

/// Coherence barrier on squared magnitude responses
///   J2(W) = sum_{i<j} -log(1 - c_ij^2),
/// with c_ij the normalized inner product of |F h_i|^2 and |F h_j|^2 over the
/// N_F x N_F grid. Filters that differ only by a shift have c_ij = 1 and give
/// +inf; coherence within 1e-12 of one (in 1 - c^2) is treated the same way.
ValueAndGradient j2_value_grad(const Eigen::MatrixXd& weights, std::size_t fft_size);

}  // namespace fbst
