#include "fbst/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fbst/errors.hpp"
#include "fbst/sparse_coding.hpp"

namespace fbst {
namespace {

double regularized_objective(const BoundFilterBank& bank, const Image& noisy, const Image& x, double nu,
                             double lambda_r) {
  const CoefficientStack hx = bank.analyze(x);
  const CoefficientStack z = hard_threshold(hx, nu);
  double residual = 0.0;
  for (std::size_t i = 0; i < hx.num_channels(); ++i) residual += squared_distance(hx.channels[i], z.channels[i]);
  return 0.5 * lambda_r * squared_distance(noisy, x) + 0.5 * residual + sparsity_penalty(z.count_nonzero(), nu);
}

}  // namespace

std::string_view to_string(DenoiseMode mode) noexcept {
  return mode == DenoiseMode::threshold ? "threshold" : "iterative";
}

DenoiseMode parse_denoise_mode(std::string_view text) {
  if (text == "iterative") return DenoiseMode::iterative;
  if (text == "threshold") return DenoiseMode::threshold;
  throw std::invalid_argument("unknown denoise mode '" + std::string(text) + "'");
}

std::string_view to_string(NuSchedule schedule) noexcept {
  return schedule == NuSchedule::literal ? "literal" : "noise_relative";
}

NuSchedule parse_nu_schedule(std::string_view text) {
  if (text == "noise_relative") return NuSchedule::noise_relative;
  if (text == "literal") return NuSchedule::literal;
  throw std::invalid_argument("unknown nu schedule '" + std::string(text) + "'");
}

double default_nu(const FilterBankTransform& transform, double sigma, NuSchedule schedule, std::size_t iterations,
                  double tau) {
  if (schedule == NuSchedule::literal) return 1e-4 * 0.1 * (255.0 * sigma);
  const double mean_norm2 = transform.weights().rowwise().squaredNorm().mean();
  const double repeat = std::pow(static_cast<double>(std::max<std::size_t>(iterations, 1)), -2.0 / 3.0);
  return tau * repeat * sigma * std::sqrt(mean_norm2);
}

ResolvedDenoiseConfig resolve(const DenoiseConfig& config, const FilterBankTransform& transform) {
  if (!(config.sigma_hint >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  ResolvedDenoiseConfig out;
  out.mode = config.mode;
  if (config.mode == DenoiseMode::iterative) {
    if (config.lambda_r) {
      out.lambda_r = *config.lambda_r;
    } else if (config.sigma_hint > 0.0) {
      out.lambda_r = 0.1 / (config.sigma_hint * config.sigma_hint);
    } else {
      throw std::invalid_argument("iterative mode needs lambda_r or a positive sigma");
    }
    if (!(out.lambda_r > 0.0)) throw std::invalid_argument("lambda_r must be positive");
    out.iterations = config.iterations ? *config.iterations
                                       : std::max<std::size_t>(
                                             1, static_cast<std::size_t>(std::ceil(config.sigma_hint * 255.0 / 10.0 - 1e-9)));
    if (out.iterations == 0) throw std::invalid_argument("iterations must be at least 1");
  }
  const std::size_t repeats = config.mode == DenoiseMode::iterative ? out.iterations : 1;
  out.nu = config.nu ? *config.nu : default_nu(transform, config.sigma_hint, config.nu_schedule, repeats, config.tau);
  if (!(out.nu >= 0.0)) throw std::invalid_argument("nu must be non-negative");
  return out;
}

Image denoise_threshold(const FilterBankTransform& transform, const Image& noisy, double nu) {
  const BoundFilterBank bank(transform, noisy.height(), noisy.width());
  return bank.solve_shifted(bank.adjoint(hard_threshold(bank.analyze(noisy), nu)), 0.0);
}

DenoiseResult denoise_iterative(const FilterBankTransform& transform, const Image& noisy, double nu,
                                double lambda_r, std::size_t iterations) {
  if (!(lambda_r > 0.0)) throw std::invalid_argument("lambda_r must be positive");
  if (iterations == 0) throw std::invalid_argument("iterations must be at least 1");
  const BoundFilterBank bank(transform, noisy.height(), noisy.width());

  Image scaled_noisy = noisy;
  for (double& v : scaled_noisy.samples()) v *= lambda_r;

  DenoiseResult result;
  Image x = noisy;
  for (std::size_t it = 0; it < iterations; ++it) {
    const CoefficientStack z = hard_threshold(bank.analyze(x), nu);
    Image rhs = bank.adjoint(z);
    for (std::size_t n = 0; n < rhs.size(); ++n) rhs.samples()[n] += scaled_noisy.samples()[n];
    x = bank.solve_shifted(rhs, lambda_r);

    Image lhs = bank.gram_apply(x);
    for (std::size_t n = 0; n < lhs.size(); ++n) lhs.samples()[n] += lambda_r * x.samples()[n];
    const double rhs_norm = rhs.norm();
    result.solve_residuals.push_back(rhs_norm > 0.0 ? std::sqrt(squared_distance(lhs, rhs)) / rhs_norm
                                                    : std::sqrt(lhs.squared_norm()));
    result.iterates.push_back(x);
  }
  result.output = x;
  return result;
}

std::vector<double> objective_trace(const FilterBankTransform& transform, const Image& noisy, double nu,
                                    double lambda_r, const std::vector<Image>& iterates) {
  const BoundFilterBank bank(transform, noisy.height(), noisy.width());
  std::vector<double> trace;
  trace.reserve(iterates.size());
  for (const auto& x : iterates) trace.push_back(regularized_objective(bank, noisy, x, nu, lambda_r));
  return trace;
}

Image denoise(const FilterBankTransform& transform, const Image& noisy, const DenoiseConfig& config) {
  const ResolvedDenoiseConfig r = resolve(config, transform);
  if (r.mode == DenoiseMode::threshold) return denoise_threshold(transform, noisy, r.nu);
  return denoise_iterative(transform, noisy, r.nu, r.lambda_r, r.iterations).output;
}

}  // namespace fbst
