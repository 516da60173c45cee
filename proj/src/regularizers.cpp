#include "fbst/regularizers.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fbst/errors.hpp"
#include "fbst/fft.hpp"

namespace fbst {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::size_t filter_size_of(const Eigen::MatrixXd& weights, std::size_t fft_size) {
  const auto taps = static_cast<std::size_t>(weights.cols());
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(taps))));
  if (k * k != taps || k == 0) {
    throw ShapeError("W has " + std::to_string(taps) + " columns, not a square filter size");
  }
  if (fft_size < k) {
    throw ShapeError("fft size " + std::to_string(fft_size) + " smaller than K = " + std::to_string(k));
  }
  return k;
}

std::vector<fft::HalfSpectrum> filter_spectra(const Eigen::MatrixXd& weights, std::size_t k,
                                              std::size_t fft_size) {
  std::vector<fft::HalfSpectrum> spectra;
  spectra.reserve(static_cast<std::size_t>(weights.rows()));
  std::vector<double> row(k * k);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index m = 0; m < weights.cols(); ++m) row[static_cast<std::size_t>(m)] = weights(i, m);
    spectra.push_back(fft::forward_padded(row, k, k, fft_size, fft_size));
  }
  return spectra;
}

// d/dh_i of sum_k g_k |H_i[k]|^2 / N^2 is 2 * IDFT(g . H_i) restricted to the
// K x K support (IDFT including the 1/N^2 factor). `weights` must be
// symmetric under k -> -k so the product stays Hermitian.
void add_spectral_gradient(const fft::HalfSpectrum& filter_spectrum, const std::vector<double>& weights,
                           double factor, std::size_t k, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  fft::HalfSpectrum product(filter_spectrum.rows, filter_spectrum.cols);
  for (std::size_t b = 0; b < product.bins.size(); ++b) product.bins[b] = filter_spectrum.bins[b] * weights[b];
  const std::vector<double> spatial = fft::inverse(product);
  const std::size_t n = filter_spectrum.cols;
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      out(static_cast<Eigen::Index>(p * k + q)) += factor * 2.0 * spatial[p * n + q];
    }
  }
}

ValueAndGradient infeasible(const Eigen::MatrixXd& weights) {
  return {kInfinity, Eigen::MatrixXd::Zero(weights.rows(), weights.cols())};
}

}  // namespace

ValueAndGradient j1_value_grad(const Eigen::MatrixXd& weights, std::size_t fft_size) {
  const std::size_t k = filter_size_of(weights, fft_size);
  const Eigen::VectorXd norms2 = weights.rowwise().squaredNorm();
  if (!(norms2.minCoeff() > 0.0) || !weights.allFinite()) return infeasible(weights);

  const auto spectra = filter_spectra(weights, k, fft_size);
  const std::size_t bins = spectra.front().bins.size();
  const std::size_t half_cols = spectra.front().half_cols();
  const double bin_scale = 1.0 / static_cast<double>(fft_size * fft_size);

  std::vector<double> lambda(bins, 0.0);
  for (const auto& s : spectra) {
    for (std::size_t b = 0; b < bins; ++b) lambda[b] += std::norm(s.bins[b]) * bin_scale;
  }
  double log_det = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (!(lambda[b] > 0.0)) return infeasible(weights);
    log_det += static_cast<double>(fft::bin_multiplicity(b % half_cols, fft_size)) * std::log(lambda[b]);
  }

  ValueAndGradient out;
  out.value = 0.5 * norms2.sum() - log_det - norms2.array().log().sum();
  out.gradient = weights - 2.0 * (norms2.cwiseInverse().asDiagonal() * weights);

  std::vector<double> inv_lambda(bins);
  for (std::size_t b = 0; b < bins; ++b) inv_lambda[b] = 1.0 / lambda[b];
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    add_spectral_gradient(spectra[static_cast<std::size_t>(i)], inv_lambda, -1.0, k, out.gradient.row(i));
  }
  return out;
}

ValueAndGradient j2_value_grad(const Eigen::MatrixXd& weights, std::size_t fft_size) {
  const std::size_t k = filter_size_of(weights, fft_size);
  const Eigen::Index channels = weights.rows();
  if (!weights.allFinite()) return infeasible(weights);
  if (channels < 2) return {0.0, Eigen::MatrixXd::Zero(weights.rows(), weights.cols())};

  const auto spectra = filter_spectra(weights, k, fft_size);
  const auto bins = static_cast<Eigen::Index>(spectra.front().bins.size());
  const std::size_t half_cols = spectra.front().half_cols();
  const double bin_scale = 1.0 / static_cast<double>(fft_size * fft_size);

  // Squared magnitude responses, one column per filter, on the half grid.
  Eigen::MatrixXd responses(bins, channels);
  Eigen::VectorXd multiplicity(bins);
  for (Eigen::Index b = 0; b < bins; ++b) {
    multiplicity(b) = static_cast<double>(fft::bin_multiplicity(static_cast<std::size_t>(b) % half_cols, fft_size));
    for (Eigen::Index i = 0; i < channels; ++i) {
      responses(b, i) = std::norm(spectra[static_cast<std::size_t>(i)].bins[static_cast<std::size_t>(b)]) * bin_scale;
    }
  }
  const Eigen::MatrixXd inner = responses.transpose() * multiplicity.asDiagonal() * responses;
  const Eigen::VectorXd lengths = inner.diagonal().cwiseSqrt();
  if (!(lengths.minCoeff() > 0.0)) return infeasible(weights);

  double value = 0.0;
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(channels, channels);
  for (Eigen::Index i = 0; i < channels; ++i) {
    for (Eigen::Index j = i + 1; j < channels; ++j) {
      const double c = inner(i, j) / (lengths(i) * lengths(j));
      const double slack = 1.0 - c * c;
      if (!(slack > 1e-12)) return infeasible(weights);
      value -= std::log(slack);
      const double s = 2.0 * c / slack;
      coupling(j, i) = coupling(i, j) = s / (lengths(i) * lengths(j));
      coupling(i, i) -= s * c / (lengths(i) * lengths(i));
      coupling(j, j) -= s * c / (lengths(j) * lengths(j));
    }
  }
  // Derivative with respect to each full-grid response entry.
  const Eigen::MatrixXd response_grad = responses * coupling;

  ValueAndGradient out;
  out.value = value;
  out.gradient = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
  std::vector<double> column(static_cast<std::size_t>(bins));
  for (Eigen::Index i = 0; i < channels; ++i) {
    for (Eigen::Index b = 0; b < bins; ++b) column[static_cast<std::size_t>(b)] = response_grad(b, i);
    add_spectral_gradient(spectra[static_cast<std::size_t>(i)], column, 1.0, k, out.gradient.row(i));
  }
  return out;
}

}  // namespace fbst
