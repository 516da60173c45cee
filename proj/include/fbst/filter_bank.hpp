#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbst/fft.hpp"
#include "fbst/image.hpp"

namespace fbst {

/// Undecimated 2-D filter bank sparsifying transform.
///
/// Row i of the N_c x K^2 matrix W is the vectorized i-th filter. Applied to
/// an image the bank computes N_c cyclic convolutions, and channel i equals
/// row i of W * X where X is the unit-stride periodic patch matrix
/// (PatchAnchor::bottom_right), reshaped to the image grid.
///
/// `fft_size` is the DFT grid N_F on which the learning regularizers sample
/// the Gram spectrum. It must be at least 2K - 1 so the grid can resolve the
/// (2K-1) x (2K-1) autocorrelation support.
class FilterBankTransform {
 public:
  /// fft_size == 0 selects the default N_F = 4K.
  explicit FilterBankTransform(Eigen::MatrixXd weights, std::size_t fft_size = 0);

  std::size_t num_channels() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t filter_size() const noexcept { return filter_size_; }
  std::size_t fft_size() const noexcept { return fft_size_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }

  /// K x K impulse response of channel i.
  Image impulse_response(std::size_t channel) const;

 private:
  Eigen::MatrixXd weights_;
  std::size_t filter_size_ = 0;
  std::size_t fft_size_ = 0;
};

/// N_c same-shape channel images (filter-bank outputs or sparse codes).
struct CoefficientStack {
  std::vector<Image> channels;

  std::size_t num_channels() const noexcept { return channels.size(); }
  std::size_t height() const noexcept { return channels.empty() ? 0 : channels.front().height(); }
  std::size_t width() const noexcept { return channels.empty() ? 0 : channels.front().width(); }
  double squared_norm() const noexcept;
  std::size_t count_nonzero() const noexcept;
  /// Sum over channels of <this_i, other_i>; shapes must match.
  double dot(const CoefficientStack& other) const;

  static CoefficientStack zeros(std::size_t channels, std::size_t height, std::size_t width);
};

/// Impulse response h_i for row w of W: the row reshaped into K x K in raster
/// order. Paired with the flipped patch vectorization, this is the one place
/// that fixes the filter orientation.
Image filter_from_row(std::span<const double> row, std::size_t filter_size);

/// Inverse of filter_from_row.
std::vector<double> row_from_filter(const Image& filter);

/// Filter bank with filter spectra precomputed for one image shape. Reuse it
/// when applying the same bank repeatedly to same-size images.
class BoundFilterBank {
 public:
  BoundFilterBank(const FilterBankTransform& transform, std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t num_channels() const noexcept { return spectra_.size(); }

  /// Channel i = h_i (cyclic convolution) x.
  CoefficientStack analyze(const Image& image) const;
  /// sum_i flip(h_i) (cyclic convolution) y_i, the adjoint of analyze.
  Image adjoint(const CoefficientStack& coefficients) const;
  /// (H*H) x.
  Image gram_apply(const Image& image) const;

  /// Eigenvalues of H*H on the half spectrum (unnormalized DFT convention):
  /// sum_i |DFT(h_i)[k]|^2.
  const fft::HalfSpectrum& gram_spectrum() const noexcept { return gram_; }
  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }

  /// Solves (H*H + shift I) x = rhs exactly in the DFT eigenbasis.
  /// Throws SingularOperatorError when lambda_min + shift <= 1e-10 * lambda_max
  /// (or is not positive).
  Image solve_shifted(const Image& rhs, double shift) const;

 private:
  void check_stack(const CoefficientStack& coefficients) const;

  std::size_t height_;
  std::size_t width_;
  std::vector<fft::HalfSpectrum> spectra_;
  fft::HalfSpectrum gram_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

CoefficientStack analyze(const FilterBankTransform& transform, const Image& image);
Image adjoint(const FilterBankTransform& transform, const CoefficientStack& coefficients);

/// (H*H + lambda_r I)^{-1} H* y. With lambda_r == 0 this is the minimum-norm
/// left inverse H^dagger, so pseudoinverse_apply(H, analyze(H, x), 0) == x for
/// any bank that is a frame at x's size.
Image pseudoinverse_apply(const FilterBankTransform& transform, const CoefficientStack& coefficients,
                          double lambda_r = 0.0);

}  // namespace fbst
