#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbst/filter_bank.hpp"

namespace fbst {

/// Hard thresholding, the proximal map of the l0 penalty: keeps t_i when
/// t_i^2 > nu^2 and zeroes it otherwise (|t_i| == nu is zeroed).
///
/// It is the exact minimizer of 0.5 ||t - z||^2 + (nu^2 / 2) ||z||_0, which is
/// the sparsity term used throughout this library (see sparsity_penalty).
std::vector<double> hard_threshold(std::span<const double> values, double nu);
void hard_threshold_in_place(std::span<double> values, double nu);
CoefficientStack hard_threshold(const CoefficientStack& coefficients, double nu);

/// (nu^2 / 2) * nonzero_count: the l0 penalty whose prox is hard_threshold(., nu).
inline double sparsity_penalty(std::size_t nonzero_count, double nu) noexcept {
  return 0.5 * nu * nu * static_cast<double>(nonzero_count);
}

/// Transform sparse code of an image: hard_threshold(analyze(H, x), nu).
CoefficientStack sparse_code(const FilterBankTransform& transform, const Image& image, double nu);

}  // namespace fbst
