#include "fbst/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "fbst/errors.hpp"

namespace fbst {
namespace {

struct Trial {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

class LineSearch {
 public:
  LineSearch(const ObjectiveFunction& f, const LbfgsParams& params, const Eigen::VectorXd& x0,
             double f0, double slope0, const Eigen::VectorXd& direction, std::size_t& evaluations)
      : f_(f), params_(params), x0_(x0), f0_(f0), slope0_(slope0), d_(direction), evaluations_(evaluations) {}

  // Returns true with `accepted` set when a strong Wolfe point is found.
  // Otherwise `accepted` holds the best sufficient-decrease point seen
  // (alpha == 0 if there is none).
  bool run(double alpha, Trial& accepted) {
    Trial prev{0.0, f0_, slope0_, x0_, {}};
    best_ = prev;
    for (std::size_t i = 0; i < params_.max_line_search_steps; ++i) {
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur, accepted);
      if (std::abs(cur.slope) <= -params_.wolfe_c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, accepted);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    accepted = best_;
    return false;
  }

 private:
  Trial evaluate(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x = x0_ + alpha * d_;
    t.grad.resize(t.x.size());
    t.value = f_(t.x, t.grad);
    ++evaluations_;
    t.slope = std::isfinite(t.value) ? t.grad.dot(d_) : 0.0;
    if (armijo(t) && t.value < best_.value) best_ = t;
    return t;
  }

  bool armijo(const Trial& t) const {
    return std::isfinite(t.value) && t.value <= f0_ + params_.wolfe_c1 * t.alpha * slope0_;
  }

  static double interpolate(const Trial& lo, const Trial& hi) {
    const double mid = 0.5 * (lo.alpha + hi.alpha);
    if (!std::isfinite(hi.value)) return mid;
    const double d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (lo.alpha - hi.alpha);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom == 0.0) return mid;
    const double a = hi.alpha - (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) / denom;
    const double left = std::min(lo.alpha, hi.alpha);
    const double right = std::max(lo.alpha, hi.alpha);
    const double margin = 0.1 * (right - left);
    if (!std::isfinite(a) || a < left + margin || a > right - margin) return mid;
    return a;
  }

  bool zoom(Trial lo, Trial hi, Trial& accepted) {
    for (std::size_t j = 0; j < params_.max_line_search_steps; ++j) {
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      Trial cur = evaluate(interpolate(lo, hi));
      if (!armijo(cur) || cur.value >= lo.value) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -params_.wolfe_c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    accepted = best_;
    return false;
  }

  const ObjectiveFunction& f_;
  const LbfgsParams& params_;
  const Eigen::VectorXd& x0_;
  double f0_;
  double slope0_;
  const Eigen::VectorXd& d_;
  std::size_t& evaluations_;
  Trial best_;
};

struct CorrectionPair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<CorrectionPair>& pairs, const Eigen::VectorXd& grad) {
  Eigen::VectorXd q = -grad;
  std::vector<double> alphas(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alphas[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alphas[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alphas[i] - beta) * pairs[i].s;
  }
  return q;
}

}  // namespace

void LbfgsParams::validate() const {
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw std::invalid_argument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (memory == 0) throw std::invalid_argument("L-BFGS memory must be positive");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient tolerance must be positive");
  if (max_line_search_steps == 0) throw std::invalid_argument("line search needs at least one step");
}

std::string_view to_string(LbfgsStatus status) noexcept {
  switch (status) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const ObjectiveFunction& objective, Eigen::VectorXd x0, const LbfgsParams& params) {
  params.validate();
  LbfgsResult result;
  result.x = std::move(x0);
  result.gradient.resize(result.x.size());
  result.value = objective(result.x, result.gradient);
  result.evaluations = 1;
  if (!std::isfinite(result.value)) throw InfeasibleError("L-BFGS started at an infeasible point");

  std::deque<CorrectionPair> pairs;
  for (;;) {
    if (result.gradient.size() == 0 || result.gradient.lpNorm<Eigen::Infinity>() <= params.gradient_tolerance) {
      result.status = LbfgsStatus::converged;
      return result;
    }
    if (result.iterations >= params.max_iterations) {
      result.status = LbfgsStatus::max_iterations;
      return result;
    }

    Eigen::VectorXd direction = two_loop(pairs, result.gradient);
    double slope = direction.dot(result.gradient);
    if (!(slope < 0.0)) {
      pairs.clear();
      direction = -result.gradient;
      slope = -result.gradient.squaredNorm();
    }
    const double initial_step = pairs.empty() ? std::min(1.0, 1.0 / result.gradient.norm()) : 1.0;

    LineSearch search(objective, params, result.x, result.value, slope, direction, result.evaluations);
    Trial step;
    const bool wolfe = search.run(initial_step, step);
    if (!wolfe && step.alpha == 0.0) {
      result.status = LbfgsStatus::line_search_failed;
      return result;
    }

    CorrectionPair pair{step.x - result.x, step.grad - result.gradient, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (pairs.size() > params.memory) pairs.pop_front();
    }
    result.x = std::move(step.x);
    result.gradient = std::move(step.grad);
    result.value = step.value;
    ++result.iterations;
  }
}

}  // namespace fbst
