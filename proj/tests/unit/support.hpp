#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "fbst/image.hpp"
#include "fbst/noise.hpp"

namespace fbst::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, NormalSampler& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng();
  }
  return m;
}

inline Image random_image(std::size_t height, std::size_t width, NormalSampler& rng) {
  Image img(height, width);
  for (double& v : img.samples()) v = rng();
  return img;
}

inline std::size_t uniform_index(NormalSampler& rng, std::size_t lo, std::size_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  auto v = lo + static_cast<std::size_t>(rng.uniform_open() * span);
  return v > hi ? hi : v;
}

/// Direct cyclic convolution out[r, c] = sum_{p, q} h[p, q] x[r - p, c - q].
inline Image direct_convolution(const Image& x, const Image& h) {
  Image out(x.height(), x.width());
  for (std::size_t r = 0; r < x.height(); ++r) {
    for (std::size_t c = 0; c < x.width(); ++c) {
      double acc = 0.0;
      for (std::size_t p = 0; p < h.height(); ++p) {
        for (std::size_t q = 0; q < h.width(); ++q) {
          acc += h(p, q) * x.at_wrapped(static_cast<long>(r) - static_cast<long>(p),
                                        static_cast<long>(c) - static_cast<long>(q));
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

/// Central-difference gradient of a scalar function of a matrix.
inline Eigen::MatrixXd numeric_gradient(const std::function<double(const Eigen::MatrixXd&)>& f,
                                        const Eigen::MatrixXd& at, double step = 1e-6) {
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double saved = probe(i);
    probe(i) = saved + step;
    const double up = f(probe);
    probe(i) = saved - step;
    const double down = f(probe);
    probe(i) = saved;
    grad(i) = (up - down) / (2.0 * step);
  }
  return grad;
}

/// max |a - b| / max(max |b|, floor): the relative error used for gradient checks.
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-8) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

}  // namespace fbst::testing
