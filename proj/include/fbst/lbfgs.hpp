#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace fbst {

struct LbfgsParams {
  std::size_t memory = 10;
  std::size_t max_iterations = 20;
  double gradient_tolerance = 1e-8;  // on the max-abs gradient entry
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_line_search_steps = 40;

  /// Throws std::invalid_argument unless 0 < c1 < c2 < 1, memory >= 1 and
  /// the tolerance is positive.
  void validate() const;
};

enum class LbfgsStatus {
  converged,           // ||grad||_inf <= tolerance
  max_iterations,
  line_search_failed,  // no point with sufficient decrease; best iterate returned
};

std::string_view to_string(LbfgsStatus status) noexcept;

/// Writes the gradient at x into `grad` and returns f(x). May return +inf
/// (gradient then ignored) to mark x as outside the feasible region.
using ObjectiveFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
};

/// Limited-memory BFGS with a strong Wolfe line search (bracketing followed
/// by safeguarded cubic zoom). Non-finite trial values fail the sufficient
/// decrease test, so the search backs off from infeasible points. The
/// returned value never exceeds f(x0).
///
/// Throws InfeasibleError if f(x0) is not finite.
LbfgsResult lbfgs_minimize(const ObjectiveFunction& objective, Eigen::VectorXd x0,
                           const LbfgsParams& params = {});

}  // namespace fbst
