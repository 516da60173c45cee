#include "fbst/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "fbst/errors.hpp"
#include "fbst/fft.hpp"

namespace fbst {

Eigen::ArrayXXd gram_eigenvalues(const FilterBankTransform& transform, std::size_t grid,
                                 DftNormalization normalization) {
  const std::size_t k = transform.filter_size();
  if (grid < k) {
    throw ShapeError("spectrum grid " + std::to_string(grid) + " is smaller than K = " + std::to_string(k));
  }
  std::vector<double> power(grid * grid, 0.0);
  for (std::size_t i = 0; i < transform.num_channels(); ++i) {
    const Image h = transform.impulse_response(i);
    fft::accumulate_power(fft::forward_padded(h.samples(), k, k, grid, grid), power);
  }
  const double scale = normalization == DftNormalization::orthonormal
                           ? 1.0 / static_cast<double>(grid * grid)
                           : 1.0;
  Eigen::ArrayXXd out(grid, grid);
  for (std::size_t r = 0; r < grid; ++r) {
    for (std::size_t c = 0; c < grid; ++c) out(r, c) = power[r * grid + c] * scale;
  }
  return out;
}

Eigen::ArrayXXd gram_impulse_response(const FilterBankTransform& transform) {
  const long k = static_cast<long>(transform.filter_size());
  const long span = 2 * k - 1;
  Eigen::ArrayXXd acf = Eigen::ArrayXXd::Zero(span, span);
  for (std::size_t i = 0; i < transform.num_channels(); ++i) {
    const Image h = transform.impulse_response(i);
    for (long n1 = -(k - 1); n1 <= k - 1; ++n1) {
      for (long n2 = -(k - 1); n2 <= k - 1; ++n2) {
        double acc = 0.0;
        for (long l1 = std::max(0L, n1); l1 < std::min(k, k + n1); ++l1) {
          for (long l2 = std::max(0L, n2); l2 < std::min(k, k + n2); ++l2) {
            acc += h(static_cast<std::size_t>(l1), static_cast<std::size_t>(l2)) *
                   h(static_cast<std::size_t>(l1 - n1), static_cast<std::size_t>(l2 - n2));
          }
        }
        acf(n1 + k - 1, n2 + k - 1) += acc;
      }
    }
  }
  return acf;
}

Eigen::ArrayXXd autocorrelation_spectrum(const FilterBankTransform& transform, std::size_t grid,
                                         DftNormalization normalization) {
  const long k = static_cast<long>(transform.filter_size());
  if (grid < static_cast<std::size_t>(2 * k - 1)) {
    throw ShapeError("autocorrelation spectrum needs N >= 2K-1 = " + std::to_string(2 * k - 1));
  }
  const Eigen::ArrayXXd acf = gram_impulse_response(transform);
  const long span = 2 * k - 1;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);

  // phi(w1, w2) = Re sum_{n1} e^{-i w1 n1} sum_{n2} h~[n1, n2] e^{-i w2 n2};
  // the inner sum is shared by every w1.
  using C = std::complex<double>;
  Eigen::ArrayXXcd inner(span, static_cast<Eigen::Index>(grid));
  for (long a = 0; a < span; ++a) {
    for (std::size_t k2 = 0; k2 < grid; ++k2) {
      C acc = 0.0;
      for (long b = 0; b < span; ++b) {
        const double angle = -step * static_cast<double>(k2) * static_cast<double>(b - (k - 1));
        acc += acf(a, b) * C(std::cos(angle), std::sin(angle));
      }
      inner(a, static_cast<Eigen::Index>(k2)) = acc;
    }
  }
  const double scale = normalization == DftNormalization::orthonormal
                           ? 1.0 / static_cast<double>(grid * grid)
                           : 1.0;
  Eigen::ArrayXXd out(grid, grid);
  for (std::size_t k1 = 0; k1 < grid; ++k1) {
    for (std::size_t k2 = 0; k2 < grid; ++k2) {
      C acc = 0.0;
      for (long a = 0; a < span; ++a) {
        const double angle = -step * static_cast<double>(k1) * static_cast<double>(a - (k - 1));
        acc += inner(a, static_cast<Eigen::Index>(k2)) * C(std::cos(angle), std::sin(angle));
      }
      out(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) = acc.real() * scale;
    }
  }
  return out;
}

double linear_pr_threshold(std::size_t grid, std::size_t filter_size) {
  if (filter_size <= 1) return std::numeric_limits<double>::infinity();
  return static_cast<double>(grid) / static_cast<double>(filter_size - 1) - 1.0;
}

SpectrumReport spectrum_report(const FilterBankTransform& transform, std::size_t grid) {
  const std::size_t k = transform.filter_size();
  if (grid < 2 * k - 1) {
    throw ShapeError("spectrum report needs N >= 2K-1 = " + std::to_string(2 * k - 1));
  }
  SpectrumReport report;
  report.grid_size = grid;
  report.eigenvalue_grid = gram_eigenvalues(transform, grid);
  Eigen::Index min_r = 0;
  Eigen::Index min_c = 0;
  // Round-off can leave tiny negative values at an exact common zero.
  report.lambda_min = std::max(0.0, report.eigenvalue_grid.minCoeff(&min_r, &min_c));
  report.lambda_max = report.eigenvalue_grid.maxCoeff();
  report.argmin_row = static_cast<std::size_t>(min_r);
  report.argmin_col = static_cast<std::size_t>(min_c);
  report.cyclic_pr = report.lambda_max > 0.0 && report.lambda_min > 1e-10 * report.lambda_max;
  report.condition_number = report.cyclic_pr ? report.lambda_max / report.lambda_min
                                             : std::numeric_limits<double>::infinity();
  report.linear_pr_threshold = linear_pr_threshold(grid, k);
  report.linear_pr_certified = report.cyclic_pr && report.condition_number <= report.linear_pr_threshold;
  return report;
}

std::vector<double> filter_norms(const FilterBankTransform& transform) {
  std::vector<double> norms;
  norms.reserve(transform.num_channels());
  for (Eigen::Index i = 0; i < transform.weights().rows(); ++i) norms.push_back(transform.weights().row(i).norm());
  return norms;
}

double max_row_coherence(const FilterBankTransform& transform) {
  const Eigen::MatrixXd& w = transform.weights();
  const std::vector<double> norms = filter_norms(transform);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < w.rows(); ++j) {
      const double denom = norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)];
      if (denom == 0.0) continue;
      worst = std::max(worst, std::abs(w.row(i).dot(w.row(j))) / denom);
    }
  }
  return worst;
}

}  // namespace fbst
