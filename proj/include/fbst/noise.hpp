#pragma once

#include <cstdint>
#include <random>

#include "fbst/image.hpp"

namespace fbst {

/// Portable standard-normal sampler.
///
/// Uniforms come from std::mt19937_64 (whose output sequence is fixed by the
/// C++ standard), converted to doubles in (0, 1) from the top 53 bits. Normals
/// are produced in pairs by the Box-Muller transform
///   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2).
/// std::normal_distribution is deliberately not used: its algorithm is
/// implementation-defined, which would break cross-platform reproducibility.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()();
  double uniform_open();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Returns image + e with e ~ N(0, sigma^2 I), deterministic in `seed`.
/// sigma == 0 returns the input unchanged.
Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

}  // namespace fbst
