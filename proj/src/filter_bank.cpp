#include "fbst/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbst/errors.hpp"

namespace fbst {
namespace {

std::size_t exact_sqrt(std::size_t n) {
  auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (root * root != n) {
    throw ShapeError("filter row length " + std::to_string(n) + " is not a perfect square");
  }
  return root;
}

}  // namespace

FilterBankTransform::FilterBankTransform(Eigen::MatrixXd weights, std::size_t fft_size)
    : weights_(std::move(weights)) {
  if (weights_.rows() == 0 || weights_.cols() == 0) {
    throw ShapeError("filter bank needs at least one channel and one tap");
  }
  if (!weights_.allFinite()) {
    throw ShapeError("filter bank weights must be finite");
  }
  filter_size_ = exact_sqrt(static_cast<std::size_t>(weights_.cols()));
  fft_size_ = fft_size == 0 ? 4 * filter_size_ : fft_size;
  if (fft_size_ < 2 * filter_size_ - 1) {
    throw ShapeError("fft size " + std::to_string(fft_size_) + " is below 2K-1 = " +
                     std::to_string(2 * filter_size_ - 1));
  }
}

Image FilterBankTransform::impulse_response(std::size_t channel) const {
  const Eigen::VectorXd row = weights_.row(static_cast<Eigen::Index>(channel)).transpose();
  return filter_from_row(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                         filter_size_);
}

double CoefficientStack::squared_norm() const noexcept {
  double acc = 0.0;
  for (const auto& ch : channels) acc += ch.squared_norm();
  return acc;
}

std::size_t CoefficientStack::count_nonzero() const noexcept {
  std::size_t n = 0;
  for (const auto& ch : channels) {
    for (double v : ch.samples()) n += (v != 0.0);
  }
  return n;
}

double CoefficientStack::dot(const CoefficientStack& other) const {
  if (other.num_channels() != num_channels()) {
    throw ShapeError("coefficient stacks have different channel counts");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (!channels[i].same_shape(other.channels[i])) {
      throw ShapeError("coefficient stacks have different shapes");
    }
    auto a = channels[i].samples();
    auto b = other.channels[i].samples();
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  }
  return acc;
}

CoefficientStack CoefficientStack::zeros(std::size_t channels, std::size_t height, std::size_t width) {
  CoefficientStack out;
  out.channels.assign(channels, Image(height, width));
  return out;
}

Image filter_from_row(std::span<const double> row, std::size_t filter_size) {
  if (filter_size == 0 || row.size() != filter_size * filter_size) {
    throw ShapeError("row length " + std::to_string(row.size()) + " does not match K^2 for K = " +
                     std::to_string(filter_size));
  }
  return Image(filter_size, filter_size, std::vector<double>(row.begin(), row.end()));
}

std::vector<double> row_from_filter(const Image& filter) {
  if (filter.height() != filter.width()) {
    throw ShapeError("filters are square");
  }
  return {filter.samples().begin(), filter.samples().end()};
}

BoundFilterBank::BoundFilterBank(const FilterBankTransform& transform, std::size_t height,
                                 std::size_t width)
    : height_(height), width_(width), gram_(height, width) {
  const std::size_t k = transform.filter_size();
  if (height < k || width < k) {
    throw ShapeError("image " + std::to_string(height) + "x" + std::to_string(width) +
                     " is smaller than the " + std::to_string(k) + "x" + std::to_string(k) +
                     " filters");
  }
  spectra_.reserve(transform.num_channels());
  for (std::size_t i = 0; i < transform.num_channels(); ++i) {
    const Image h = transform.impulse_response(i);
    spectra_.push_back(fft::forward_padded(h.samples(), k, k, height, width));
  }
  for (const auto& spectrum : spectra_) {
    for (std::size_t b = 0; b < gram_.bins.size(); ++b) gram_.bins[b] += std::norm(spectrum.bins[b]);
  }
  lambda_min_ = std::numeric_limits<double>::infinity();
  lambda_max_ = 0.0;
  for (const auto& bin : gram_.bins) {
    lambda_min_ = std::min(lambda_min_, bin.real());
    lambda_max_ = std::max(lambda_max_, bin.real());
  }
}

void BoundFilterBank::check_stack(const CoefficientStack& coefficients) const {
  if (coefficients.num_channels() != spectra_.size()) {
    throw ShapeError("coefficient stack has " + std::to_string(coefficients.num_channels()) +
                     " channels, bank has " + std::to_string(spectra_.size()));
  }
  for (const auto& ch : coefficients.channels) {
    if (ch.height() != height_ || ch.width() != width_) {
      throw ShapeError("coefficient channel shape does not match the bound image shape");
    }
  }
}

CoefficientStack BoundFilterBank::analyze(const Image& image) const {
  if (image.height() != height_ || image.width() != width_) {
    throw ShapeError("image shape does not match the bound filter bank");
  }
  const fft::HalfSpectrum x_hat = fft::forward(image.samples(), height_, width_);
  CoefficientStack out;
  out.channels.reserve(spectra_.size());
  fft::HalfSpectrum product(height_, width_);
  for (const auto& h_hat : spectra_) {
    for (std::size_t b = 0; b < product.bins.size(); ++b) product.bins[b] = h_hat.bins[b] * x_hat.bins[b];
    out.channels.emplace_back(height_, width_, fft::inverse(product));
  }
  return out;
}

Image BoundFilterBank::adjoint(const CoefficientStack& coefficients) const {
  check_stack(coefficients);
  // Channels are summed in the frequency domain in channel order, so the
  // result does not depend on any scheduling.
  fft::HalfSpectrum sum(height_, width_);
  for (std::size_t i = 0; i < spectra_.size(); ++i) {
    const fft::HalfSpectrum y_hat = fft::forward(coefficients.channels[i].samples(), height_, width_);
    for (std::size_t b = 0; b < sum.bins.size(); ++b) sum.bins[b] += std::conj(spectra_[i].bins[b]) * y_hat.bins[b];
  }
  return Image(height_, width_, fft::inverse(sum));
}

Image BoundFilterBank::gram_apply(const Image& image) const {
  if (image.height() != height_ || image.width() != width_) {
    throw ShapeError("image shape does not match the bound filter bank");
  }
  fft::HalfSpectrum x_hat = fft::forward(image.samples(), height_, width_);
  for (std::size_t b = 0; b < x_hat.bins.size(); ++b) x_hat.bins[b] *= gram_.bins[b].real();
  return Image(height_, width_, fft::inverse(x_hat));
}

Image BoundFilterBank::solve_shifted(const Image& rhs, double shift) const {
  if (rhs.height() != height_ || rhs.width() != width_) {
    throw ShapeError("right-hand side shape does not match the bound filter bank");
  }
  if (!(shift >= 0.0)) {
    throw ShapeError("shift must be non-negative");
  }
  const double smallest = lambda_min_ + shift;
  if (!(smallest > 0.0) || smallest <= 1e-10 * lambda_max_) {
    throw SingularOperatorError("Gram operator is singular at " + std::to_string(height_) + "x" +
                                std::to_string(width_) + " (lambda_min + shift = " +
                                std::to_string(smallest) + ")");
  }
  fft::HalfSpectrum x_hat = fft::forward(rhs.samples(), height_, width_);
  for (std::size_t b = 0; b < x_hat.bins.size(); ++b) x_hat.bins[b] /= gram_.bins[b].real() + shift;
  return Image(height_, width_, fft::inverse(x_hat));
}

CoefficientStack analyze(const FilterBankTransform& transform, const Image& image) {
  return BoundFilterBank(transform, image.height(), image.width()).analyze(image);
}

Image adjoint(const FilterBankTransform& transform, const CoefficientStack& coefficients) {
  if (coefficients.channels.empty()) {
    throw ShapeError("empty coefficient stack");
  }
  return BoundFilterBank(transform, coefficients.height(), coefficients.width()).adjoint(coefficients);
}

Image pseudoinverse_apply(const FilterBankTransform& transform, const CoefficientStack& coefficients,
                          double lambda_r) {
  if (coefficients.channels.empty()) {
    throw ShapeError("empty coefficient stack");
  }
  const BoundFilterBank bank(transform, coefficients.height(), coefficients.width());
  return bank.solve_shifted(bank.adjoint(coefficients), lambda_r);
}

}  // namespace fbst
