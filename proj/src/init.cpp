#include "fbst/init.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fbst/errors.hpp"
#include "fbst/noise.hpp"
#include "fbst/regularizers.hpp"
#include "fbst/spectrum.hpp"

namespace fbst {
namespace {

constexpr int kMaxAttempts = 100;

void fill_gaussian(Eigen::MatrixXd& weights, Eigen::Index first_row, double scale, NormalSampler& rng) {
  for (Eigen::Index i = first_row; i < weights.rows(); ++i) {
    for (Eigen::Index m = 0; m < weights.cols(); ++m) weights(i, m) = scale * rng();
  }
}

}  // namespace

std::string_view to_string(InitMode mode) noexcept {
  return mode == InitMode::dct ? "dct" : "random_gaussian";
}

InitMode parse_init_mode(std::string_view text) {
  if (text == "dct") return InitMode::dct;
  if (text == "random_gaussian" || text == "gaussian" || text == "random") return InitMode::random_gaussian;
  throw std::invalid_argument("unknown init mode '" + std::string(text) + "'");
}

Eigen::MatrixXd dct_basis(std::size_t filter_size) {
  const auto k = static_cast<Eigen::Index>(filter_size);
  Eigen::MatrixXd c(k, k);
  for (Eigen::Index u = 0; u < k; ++u) {
    const double scale = std::sqrt((u == 0 ? 1.0 : 2.0) / static_cast<double>(k));
    for (Eigen::Index n = 0; n < k; ++n) {
      c(u, n) = scale * std::cos(std::numbers::pi * static_cast<double>((2 * n + 1) * u) / (2.0 * static_cast<double>(k)));
    }
  }
  Eigen::MatrixXd basis(k * k, k * k);
  for (Eigen::Index u = 0; u < k; ++u) {
    for (Eigen::Index v = 0; v < k; ++v) {
      for (Eigen::Index p = 0; p < k; ++p) {
        for (Eigen::Index q = 0; q < k; ++q) basis(u * k + v, p * k + q) = c(u, p) * c(v, q);
      }
    }
  }
  return basis;
}

bool is_feasible(const Eigen::MatrixXd& weights, std::size_t fft_size) {
  if (!weights.allFinite() || !(weights.rowwise().squaredNorm().minCoeff() > 0.0)) return false;
  const FilterBankTransform transform(weights, fft_size);
  const Eigen::ArrayXXd grid = gram_eigenvalues(transform, transform.fft_size());
  if (!(grid.minCoeff() > 1e-10 * grid.maxCoeff())) return false;
  return std::isfinite(j2_value_grad(weights, transform.fft_size()).value);
}

FilterBankTransform init_transform(std::size_t filter_size, std::size_t num_channels, InitMode mode,
                                   std::uint64_t seed, std::size_t fft_size) {
  if (filter_size == 0 || num_channels == 0) throw ShapeError("filter size and channel count must be positive");
  const auto taps = static_cast<Eigen::Index>(filter_size * filter_size);
  const auto channels = static_cast<Eigen::Index>(num_channels);
  const double scale = 1.0 / static_cast<double>(filter_size);
  NormalSampler rng(seed);

  Eigen::MatrixXd weights(channels, taps);
  Eigen::Index dct_rows = 0;
  if (mode == InitMode::dct) {
    dct_rows = std::min(channels, taps);
    weights.topRows(dct_rows) = dct_basis(filter_size).topRows(dct_rows);
  }
  const Eigen::MatrixXd dct_part = weights.topRows(dct_rows);
  fill_gaussian(weights, dct_rows, scale, rng);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (is_feasible(weights, fft_size)) return FilterBankTransform(weights, fft_size);
    if (dct_rows > 0) {
      for (Eigen::Index i = 0; i < dct_rows; ++i) {
        for (Eigen::Index m = 0; m < taps; ++m) weights(i, m) = dct_part(i, m) + 0.01 * scale * rng();
      }
    }
    fill_gaussian(weights, dct_rows, scale, rng);
  }
  throw InfeasibleError("could not draw a feasible initial transform in " + std::to_string(kMaxAttempts) +
                        " attempts");
}

}  // namespace fbst
