#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "fbst/filter_bank.hpp"

namespace fbst {

enum class InitMode { random_gaussian, dct };

std::string_view to_string(InitMode mode) noexcept;
/// Accepts "random_gaussian" / "gaussian" and "dct"; throws std::invalid_argument otherwise.
InitMode parse_init_mode(std::string_view text);

/// K^2 x K^2 orthonormal 2-D DCT-II basis. Row u * K + v holds the separable
/// basis function with vertical frequency u and horizontal frequency v.
Eigen::MatrixXd dct_basis(std::size_t filter_size);

/// True when no row of W is zero, the orthonormal Gram spectrum on the
/// N_F grid satisfies lambda_min > 1e-10 lambda_max, and no two squared
/// magnitude responses are collinear (J1 and J2 are finite).
bool is_feasible(const Eigen::MatrixXd& weights, std::size_t fft_size);

/// Initial transform for learning.
///
/// random_gaussian: i.i.d. N(0, 1/K^2) entries.
/// dct: the first min(N_c, K^2) DCT rows in raster frequency order; any
/// further channels are Gaussian rows.
///
/// An infeasible draw is redrawn (Gaussian rows) or perturbed by Gaussian
/// noise of standard deviation 0.01/K (DCT rows), up to 100 attempts, after
/// which InfeasibleError is thrown. The result is deterministic in `seed`.
FilterBankTransform init_transform(std::size_t filter_size, std::size_t num_channels, InitMode mode,
                                   std::uint64_t seed, std::size_t fft_size = 0);

}  // namespace fbst
