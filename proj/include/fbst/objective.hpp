#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "fbst/filter_bank.hpp"
#include "fbst/image.hpp"

namespace fbst {

/// Second-order statistics of (X, Z) that determine the sparsification error
///   ||W X - Z||_F^2 = tr(W^T W G) - 2 tr(W Y) + zsq,
/// with G = X X^T (K^2 x K^2), Y = X Z^T (K^2 x N_c) and zsq = ||Z||_F^2.
struct Moments {
  Eigen::MatrixXd gram;
  Eigen::MatrixXd cross;
  double zsq = 0.0;

  static Moments zeros(std::size_t taps, std::size_t channels);
  Moments& operator+=(const Moments& other);
};

/// Dense moments of an explicit patch matrix X (K^2 x P) and code Z (N_c x P).
Moments precompute_moments(const Eigen::MatrixXd& patches, const Eigen::MatrixXd& codes);

/// G for the unit-stride periodic patch matrix of `image`, from its cyclic
/// autocorrelation: G[m, l] = R(d_m - d_l) with d_m = (m / K, m % K).
Eigen::MatrixXd image_gram_moment(const Image& image, std::size_t filter_size);

/// Y for the same patch matrix against channel images Z_i:
/// Y[m, i] = sum_n x[n - d_m] z_i[n], evaluated as a cyclic cross-correlation.
Eigen::MatrixXd image_cross_moment(const Image& image, const CoefficientStack& codes,
                                   std::size_t filter_size);

/// Moments of one image against its code, using the FFT path.
Moments image_moments(const Image& image, const CoefficientStack& codes, std::size_t filter_size);

struct ObjectiveBreakdown {
  double total = 0.0;
  double sparsification_error = 0.0;  // 1/2 ||W X - Z||^2
  double j1 = 0.0;
  double j2 = 0.0;
  double sparsity_penalty = 0.0;      // (nu^2 / 2) ||Z||_0
};

struct RegularizerWeights {
  double mu = 3.0;
  double lambda = 7e-4;
};

struct ObjectiveEvaluation {
  ObjectiveBreakdown breakdown;  // sparsity_penalty left at 0
  Eigen::MatrixXd gradient;
};

/// Transform-update objective 1/2 ||W X - Z||^2 + mu J1(W) + lambda J2(W) and
/// its gradient W G - Y^T + mu grad J1 + lambda grad J2. A regularizer with
/// zero weight is not evaluated. Infeasible W gives total = +inf.
ObjectiveEvaluation objective_and_grad(const Eigen::MatrixXd& weights, const Moments& moments,
                                       const RegularizerWeights& regularizers, std::size_t fft_size);

}  // namespace fbst
