#include "fbst/image.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fbst/errors.hpp"

namespace fbst {

Image::Image(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), samples_(height * width, fill) {
  if (height == 0 || width == 0) {
    throw ShapeError("image dimensions must be positive");
  }
}

Image::Image(std::size_t height, std::size_t width, std::vector<double> samples)
    : height_(height), width_(width), samples_(std::move(samples)) {
  if (height == 0 || width == 0) {
    throw ShapeError("image dimensions must be positive");
  }
  if (samples_.size() != height * width) {
    throw ShapeError("sample count " + std::to_string(samples_.size()) + " does not match " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
}

double Image::at_wrapped(long r, long c) const noexcept {
  const long h = static_cast<long>(height_);
  const long w = static_cast<long>(width_);
  r %= h;
  c %= w;
  if (r < 0) r += h;
  if (c < 0) c += w;
  return samples_[static_cast<std::size_t>(r) * width_ + static_cast<std::size_t>(c)];
}

double Image::squared_norm() const noexcept {
  double acc = 0.0;
  for (double v : samples_) acc += v * v;
  return acc;
}

double Image::norm() const noexcept { return std::sqrt(squared_norm()); }

bool Image::all_finite() const noexcept {
  for (double v : samples_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::pair<Image, double> normalize_unit_norm(const Image& image) {
  const double n = image.norm();
  if (!(n > 0.0)) {
    throw DegenerateInputError("cannot normalize an all-zero image");
  }
  Image out = image;
  for (double& v : out.samples()) v /= n;
  return {std::move(out), n};
}

double squared_distance(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("image shapes differ");
  }
  double acc = 0.0;
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = sa[i] - sb[i];
    acc += d * d;
  }
  return acc;
}

double psnr(const Image& x, const Image& x_star, double peak) {
  const double err = std::sqrt(squared_distance(x, x_star));
  if (err == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 20.0 * std::log10(peak * std::sqrt(static_cast<double>(x.size())) / err);
}

}  // namespace fbst
