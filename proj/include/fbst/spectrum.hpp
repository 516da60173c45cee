#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fbst/filter_bank.hpp"

namespace fbst {

/// Scaling of the 2-D DFT used when reporting Gram eigenvalues.
///
/// `unnormalized` gives the true eigenvalues of the cyclic Gram operator H*H
/// on N x N images: lambda[k] = sum_i |sum_n h_i[n] e^{-2 pi i k.n / N}|^2.
/// `orthonormal` applies the 1/N factor per DFT bin (so 1/N^2 on lambda),
/// which makes sum_k lambda[k] = sum_i ||h_i||^2 and is the convention the
/// learning regularizer J1 is written in.
enum class DftNormalization { unnormalized, orthonormal };

/// N x N grid of Gram eigenvalues, computed from the DFTs of the zero-padded
/// filters. Entry (k1, k2) corresponds to frequency (2 pi k1 / N, 2 pi k2 / N).
Eigen::ArrayXXd gram_eigenvalues(const FilterBankTransform& transform, std::size_t grid,
                                 DftNormalization normalization = DftNormalization::unnormalized);

/// Sum of channel autocorrelations h~[n] = sum_i sum_l h_i[l] h_i[l - n] on
/// its (2K-1) x (2K-1) support; element (K-1, K-1) is lag zero.
Eigen::ArrayXXd gram_impulse_response(const FilterBankTransform& transform);

/// Samples phi(w) = sum_n h~[n] cos(w . n), the DTFT of the Gram impulse
/// response, on the N x N DFT grid. Independent of gram_eigenvalues (direct
/// trigonometric evaluation, no FFT); the two agree under the same
/// normalization. Requires N >= 2K - 1.
Eigen::ArrayXXd autocorrelation_spectrum(const FilterBankTransform& transform, std::size_t grid,
                                         DftNormalization normalization = DftNormalization::unnormalized);

/// N / (K - 1) - 1: the largest sampled condition number for which cyclic PR
/// on an N-point grid certifies PR of the linear-convolution bank. Infinite
/// for K == 1.
double linear_pr_threshold(std::size_t grid, std::size_t filter_size);

struct SpectrumReport {
  std::size_t grid_size = 0;
  Eigen::ArrayXXd eigenvalue_grid;  // unnormalized convention
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition_number = 0.0;    // +inf when lambda_min == 0
  std::size_t argmin_row = 0;       // frequency index of lambda_min
  std::size_t argmin_col = 0;
  double linear_pr_threshold = 0.0;
  bool cyclic_pr = false;            // lambda_min > 1e-10 * lambda_max
  bool linear_pr_certified = false;  // cyclic_pr && kappa <= threshold
};

/// Frame bounds, condition number and PR verdicts of the undecimated cyclic
/// bank on N x N images. Requires N >= 2K - 1.
SpectrumReport spectrum_report(const FilterBankTransform& transform, std::size_t grid);

/// Euclidean norm of each filter (row of W).
std::vector<double> filter_norms(const FilterBankTransform& transform);

/// Largest |<w_i, w_j>| / (||w_i|| ||w_j||) over channel pairs; 0 for one channel.
double max_row_coherence(const FilterBankTransform& transform);

}  // namespace fbst
