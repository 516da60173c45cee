#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "fbst/filter_bank.hpp"
#include "fbst/image.hpp"

namespace fbst {

enum class DenoiseMode { iterative, threshold };

/// How the default threshold is derived from the noise level sigma (peak-1 units).
enum class NuSchedule {
  /// nu = tau * sigma * rms filter norm: each channel's noise has standard
  /// deviation sigma * ||h_i||, so tau is a threshold in noise units. In
  /// iterative mode tau is divided by T^(2/3) for T iterations, since the
  /// thresholding is repeated on progressively cleaner estimates.
  noise_relative,
  /// nu = 1e-4 * 0.1 * (255 sigma), the magnitude formula read literally.
  literal,
};

std::string_view to_string(DenoiseMode mode) noexcept;
DenoiseMode parse_denoise_mode(std::string_view text);
std::string_view to_string(NuSchedule schedule) noexcept;
NuSchedule parse_nu_schedule(std::string_view text);

inline constexpr double kDefaultNoiseRelativeTau = 2.5;

struct DenoiseConfig {
  DenoiseMode mode = DenoiseMode::iterative;
  double sigma_hint = 0.0;  // noise standard deviation, peak-1 units
  std::optional<double> nu;
  std::optional<double> lambda_r;
  std::optional<std::size_t> iterations;
  NuSchedule nu_schedule = NuSchedule::noise_relative;
  double tau = kDefaultNoiseRelativeTau;
};

/// Config with every optional field filled in.
struct ResolvedDenoiseConfig {
  DenoiseMode mode = DenoiseMode::iterative;
  double nu = 0.0;
  double lambda_r = 0.0;
  std::size_t iterations = 1;
};

/// Fills defaults: iterations = ceil(255 sigma / 10) (at least 1),
/// lambda_r = 0.1 / sigma^2, nu = default_nu(...). Throws
/// std::invalid_argument when a needed default is undefined (sigma == 0
/// without an explicit lambda_r in iterative mode) or a field is out of range.
ResolvedDenoiseConfig resolve(const DenoiseConfig& config, const FilterBankTransform& transform);

/// Default threshold for `sigma` under a schedule. `iterations` only matters
/// for the noise-relative schedule in iterative mode (pass 1 for threshold mode).
double default_nu(const FilterBankTransform& transform, double sigma, NuSchedule schedule,
                  std::size_t iterations = 1, double tau = kDefaultNoiseRelativeTau);

/// H^dagger hard_threshold(H y, nu). Throws SingularOperatorError if the bank
/// is not a frame at y's size.
Image denoise_threshold(const FilterBankTransform& transform, const Image& noisy, double nu);

struct DenoiseResult {
  Image output;
  std::vector<Image> iterates;        // x^1 .. x^T
  std::vector<double> solve_residuals;  // relative residual of each x-solve
};

/// Alternating minimization of
///   lambda_r/2 ||y - x||^2 + 1/2 ||H x - z||^2 + (nu^2 / 2) ||z||_0
/// from x^0 = y: z <- hard_threshold(H x, nu), then
/// x <- (H*H + lambda_r I)^{-1} (H* z + lambda_r y) solved in the DFT basis.
DenoiseResult denoise_iterative(const FilterBankTransform& transform, const Image& noisy, double nu,
                                double lambda_r, std::size_t iterations);

/// The objective above at each iterate, with z the optimal code for that
/// iterate (hard_threshold(H x, nu)). Non-increasing along denoise_iterative.
std::vector<double> objective_trace(const FilterBankTransform& transform, const Image& noisy, double nu,
                                    double lambda_r, const std::vector<Image>& iterates);

/// Dispatches on config.mode after resolving defaults.
Image denoise(const FilterBankTransform& transform, const Image& noisy, const DenoiseConfig& config);

}  // namespace fbst
