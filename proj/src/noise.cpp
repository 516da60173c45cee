#include "fbst/noise.hpp"

#include <cmath>
#include <numbers>

#include "fbst/errors.hpp"

namespace fbst {

double NormalSampler::uniform_open() {
  // (k + 0.5) / 2^53 lies strictly inside (0, 1).
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double NormalSampler::operator()() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ShapeError("noise sigma must be finite and non-negative");
  }
  Image out = image;
  if (sigma == 0.0) return out;
  NormalSampler normal(seed);
  for (double& v : out.samples()) v += sigma * normal();
  return out;
}

}  // namespace fbst
