#include "fbst/objective.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fbst/errors.hpp"
#include "fbst/fft.hpp"
#include "fbst/regularizers.hpp"

namespace fbst {
namespace {

std::size_t wrap(long value, std::size_t period) {
  const long p = static_cast<long>(period);
  return static_cast<std::size_t>(((value % p) + p) % p);
}

// Circular lag table of two equally shaped real grids: out[t] = sum_n a[n] b[n + t].
std::vector<double> cyclic_correlation(const fft::HalfSpectrum& a, const fft::HalfSpectrum& b) {
  fft::HalfSpectrum product(a.rows, a.cols);
  for (std::size_t k = 0; k < product.bins.size(); ++k) product.bins[k] = std::conj(a.bins[k]) * b.bins[k];
  return fft::inverse(product);
}

}  // namespace

Moments Moments::zeros(std::size_t taps, std::size_t channels) {
  const auto t = static_cast<Eigen::Index>(taps);
  return {Eigen::MatrixXd::Zero(t, t), Eigen::MatrixXd::Zero(t, static_cast<Eigen::Index>(channels)), 0.0};
}

Moments& Moments::operator+=(const Moments& other) {
  if (gram.rows() != other.gram.rows() || cross.cols() != other.cross.cols()) {
    throw ShapeError("cannot accumulate moments of different shapes");
  }
  gram += other.gram;
  cross += other.cross;
  zsq += other.zsq;
  return *this;
}

Moments precompute_moments(const Eigen::MatrixXd& patches, const Eigen::MatrixXd& codes) {
  if (patches.cols() != codes.cols()) {
    throw ShapeError("patch matrix has " + std::to_string(patches.cols()) + " columns but code has " +
                     std::to_string(codes.cols()));
  }
  Moments m;
  m.gram = patches * patches.transpose();
  m.cross = patches * codes.transpose();
  m.zsq = codes.squaredNorm();
  return m;
}

Eigen::MatrixXd image_gram_moment(const Image& image, std::size_t filter_size) {
  const std::size_t k = filter_size;
  if (k == 0) throw ShapeError("filter size must be positive");
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const auto spectrum = fft::forward(image.samples(), h, w);
  const std::vector<double> r = cyclic_correlation(spectrum, spectrum);

  const auto taps = static_cast<Eigen::Index>(k * k);
  Eigen::MatrixXd g(taps, taps);
  for (Eigen::Index m = 0; m < taps; ++m) {
    const long pm = static_cast<long>(m) / static_cast<long>(k);
    const long qm = static_cast<long>(m) % static_cast<long>(k);
    for (Eigen::Index l = 0; l < taps; ++l) {
      const long pl = static_cast<long>(l) / static_cast<long>(k);
      const long ql = static_cast<long>(l) % static_cast<long>(k);
      g(m, l) = r[wrap(pm - pl, h) * w + wrap(qm - ql, w)];
    }
  }
  return g;
}

Eigen::MatrixXd image_cross_moment(const Image& image, const CoefficientStack& codes,
                                   std::size_t filter_size) {
  const std::size_t k = filter_size;
  if (codes.height() != image.height() || codes.width() != image.width()) {
    throw ShapeError("code channels do not match the image shape");
  }
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const auto spectrum = fft::forward(image.samples(), h, w);

  Eigen::MatrixXd y(static_cast<Eigen::Index>(k * k), static_cast<Eigen::Index>(codes.num_channels()));
  for (std::size_t i = 0; i < codes.num_channels(); ++i) {
    const auto code_spectrum = fft::forward(codes.channels[i].samples(), h, w);
    const std::vector<double> c = cyclic_correlation(spectrum, code_spectrum);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) {
        y(static_cast<Eigen::Index>(p * k + q), static_cast<Eigen::Index>(i)) = c[(p % h) * w + (q % w)];
      }
    }
  }
  return y;
}

Moments image_moments(const Image& image, const CoefficientStack& codes, std::size_t filter_size) {
  return {image_gram_moment(image, filter_size), image_cross_moment(image, codes, filter_size),
          codes.squared_norm()};
}

ObjectiveEvaluation objective_and_grad(const Eigen::MatrixXd& weights, const Moments& moments,
                                       const RegularizerWeights& regularizers, std::size_t fft_size) {
  if (moments.gram.rows() != weights.cols() || moments.cross.rows() != weights.cols() ||
      moments.cross.cols() != weights.rows()) {
    throw ShapeError("moments do not match W of shape " + std::to_string(weights.rows()) + "x" +
                     std::to_string(weights.cols()));
  }
  ObjectiveEvaluation out;
  const Eigen::MatrixXd wg = weights * moments.gram;
  const double quadratic = (wg.array() * weights.array()).sum();
  const double linear = (weights * moments.cross).trace();
  out.breakdown.sparsification_error = 0.5 * (quadratic - 2.0 * linear + moments.zsq);
  out.gradient = wg - moments.cross.transpose();

  double total = out.breakdown.sparsification_error;
  if (regularizers.mu != 0.0) {
    const ValueAndGradient j1 = j1_value_grad(weights, fft_size);
    out.breakdown.j1 = j1.value;
    total += regularizers.mu * j1.value;
    if (std::isfinite(j1.value)) out.gradient += regularizers.mu * j1.gradient;
  }
  if (regularizers.lambda != 0.0 && std::isfinite(total)) {
    const ValueAndGradient j2 = j2_value_grad(weights, fft_size);
    out.breakdown.j2 = j2.value;
    total += regularizers.lambda * j2.value;
    if (std::isfinite(j2.value)) out.gradient += regularizers.lambda * j2.gradient;
  }
  out.breakdown.total = total;
  return out;
}

}  // namespace fbst
