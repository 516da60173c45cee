#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fbst/errors.hpp"
#include "fbst/init.hpp"
#include "fbst/lbfgs.hpp"
#include "fbst/learn.hpp"
#include "fbst/objective.hpp"
#include "fbst/patches.hpp"
#include "fbst/regularizers.hpp"
#include "fbst/sparse_coding.hpp"
#include "fbst/spectrum.hpp"
#include "support.hpp"

using namespace fbst;
using fbst::testing::numeric_gradient;
using fbst::testing::random_image;
using fbst::testing::random_matrix;
using fbst::testing::relative_error;
using fbst::testing::uniform_index;

namespace {

// Minimizer of 1/2 ||t - z||^2 + (nu^2 / 2) ||z||_0 by enumerating supports.
std::vector<double> brute_force_prox(const std::vector<double>& t, double nu) {
  const std::size_t n = t.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_z(n, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double cost = 0.0;
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        z[i] = t[i];
        cost += 0.5 * nu * nu;
      } else {
        cost += 0.5 * t[i] * t[i];
      }
    }
    if (cost < best) {
      best = cost;
      best_z = z;
    }
  }
  return best_z;
}

double j1_single_delta(double c, double n) {
  return 0.5 * c * c - n * n * std::log(c * c / (n * n)) - std::log(c * c);
}

}  // namespace

TEST_CASE("hard threshold rule") {
  CHECK(hard_threshold(std::vector<double>{0.5, -0.05, 0.2}, 0.1) == std::vector<double>{0.5, 0.0, 0.2});
  CHECK(hard_threshold(std::vector<double>{0.5, -0.05, 0.0}, 0.0) == std::vector<double>{0.5, -0.05, 0.0});
  CHECK(hard_threshold(std::vector<double>{0.1, -0.1}, 0.1) == std::vector<double>{0.0, 0.0});
  CHECK(sparsity_penalty(4, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("hard threshold is the exact l0 prox") {
  NormalSampler rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = uniform_index(rng, 1, 10);
    std::vector<double> t(n);
    for (double& v : t) v = rng();
    const double nu = 1.5 * rng.uniform_open();
    CHECK(hard_threshold(t, nu) == brute_force_prox(t, nu));
  }
}

TEST_CASE("sparse_code") {
  NormalSampler rng(4);
  const FilterBankTransform t(random_matrix(3, 4, rng));
  const Image x = random_image(6, 6, rng);
  const CoefficientStack full = analyze(t, x);
  CHECK(sparse_code(t, x, 0.0).channels == full.channels);
  CHECK(sparse_code(t, x, 1e6).count_nonzero() == 0);
}

TEST_CASE("moments: trace identity, FFT path and trivial cases") {
  NormalSampler rng(21);
  const Eigen::MatrixXd w = random_matrix(3, 4, rng);
  const Eigen::MatrixXd x = random_matrix(4, 10, rng);
  const Eigen::MatrixXd z = random_matrix(3, 10, rng);
  const Moments m = precompute_moments(x, z);
  const double trace_form = (w.transpose() * w * m.gram).trace() - 2.0 * (w * m.cross).trace() + m.zsq;
  CHECK(trace_form == doctest::Approx((w * x - z).squaredNorm()).epsilon(1e-10));

  const Moments exact = precompute_moments(x, w * x);
  RegularizerWeights none{0.0, 0.0};
  const ObjectiveEvaluation at_fit = objective_and_grad(w, exact, none, 8);
  CHECK(std::abs(at_fit.breakdown.sparsification_error) < 1e-10);
  CHECK(at_fit.gradient.cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd column = random_matrix(4, 1, rng);
  CHECK((precompute_moments(column, random_matrix(3, 1, rng)).gram - column * column.transpose()).norm() < 1e-14);
  CHECK_THROWS_AS(precompute_moments(x, random_matrix(3, 9, rng)), ShapeError);

  for (std::size_t k : {1, 2, 3, 4}) {
    const Image img = random_image(7, 9, rng);
    const FilterBankTransform t(random_matrix(2, static_cast<Eigen::Index>(k * k), rng));
    const CoefficientStack codes = sparse_code(t, img, 0.3);
    Eigen::MatrixXd zmat(2, static_cast<Eigen::Index>(img.size()));
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t n = 0; n < img.size(); ++n) zmat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = codes.channels[i].samples()[n];
    }
    const Moments dense = precompute_moments(build_patch_matrix(img, k, 1).data, zmat);
    const Moments fast = image_moments(img, codes, k);
    CHECK((dense.gram - fast.gram).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((dense.cross - fast.cross).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(dense.zsq == doctest::Approx(fast.zsq));
  }
}

TEST_CASE("J1 closed form, barrier and gradient") {
  for (double c : {0.5, 1.0, 3.0}) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 9);
    w(0, 0) = c;
    CHECK(j1_value_grad(w, 8).value == doctest::Approx(j1_single_delta(c, 8.0)).epsilon(1e-12));
  }
  NormalSampler rng(9);
  Eigen::MatrixXd zero_row = random_matrix(3, 9, rng);
  zero_row.row(1).setZero();
  CHECK(std::isinf(j1_value_grad(zero_row, 8).value));

  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd w = random_matrix(4, 9, rng, 1.0 / 3.0);
    const auto f = [](const Eigen::MatrixXd& m) { return j1_value_grad(m, 8).value; };
    CHECK(relative_error(j1_value_grad(w, 8).gradient, numeric_gradient(f, w)) < 1e-5);
  }
}

TEST_CASE("J2 special cases and gradient") {
  Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(2, 9);
  shifted.row(0) << 1, 2, 0, 3, 4, 0, 0, 0, 0;
  shifted.row(1) << 0, 0, 0, 0, 1, 2, 0, 3, 4;
  CHECK(std::isinf(j2_value_grad(shifted, 6).value));

  Eigen::MatrixXd disjoint(2, 4);
  disjoint << 1, 1, 1, 1,
              1, -1, 1, -1;
  CHECK(j2_value_grad(disjoint, 2).value == doctest::Approx(0.0).scale(1.0));

  NormalSampler rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd w = random_matrix(4, 9, rng, 1.0 / 3.0);
    const auto f = [](const Eigen::MatrixXd& m) { return j2_value_grad(m, 8).value; };
    CHECK(relative_error(j2_value_grad(w, 8).gradient, numeric_gradient(f, w)) < 1e-5);
  }
}

TEST_CASE("total objective gradient") {
  NormalSampler rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd w = random_matrix(4, 9, rng, 1.0 / 3.0);
    const Eigen::MatrixXd x = random_matrix(9, 20, rng);
    Eigen::MatrixXd z = w * x;
    hard_threshold_in_place(std::span<double>(z.data(), static_cast<std::size_t>(z.size())), 0.3);
    const Moments m = precompute_moments(x, z);
    const RegularizerWeights reg{3.0, 0.5};
    const auto f = [&](const Eigen::MatrixXd& v) { return objective_and_grad(v, m, reg, 12).breakdown.total; };
    const ObjectiveEvaluation e = objective_and_grad(w, m, reg, 12);
    CHECK(relative_error(e.gradient, numeric_gradient(f, w)) < 1e-5);
    const ObjectiveBreakdown& b = e.breakdown;
    CHECK(b.total == doctest::Approx(b.sparsification_error + 3.0 * b.j1 + 0.5 * b.j2).epsilon(1e-12));
  }
}

TEST_CASE("L-BFGS") {
  SUBCASE("quadratic bowl") {
    Eigen::VectorXd a(12);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = static_cast<double>(i) - 5.5;
    const ObjectiveFunction f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g = x - a;
      return 0.5 * g.squaredNorm();
    };
    LbfgsParams p;
    p.max_iterations = 12;
    const LbfgsResult r = lbfgs_minimize(f, Eigen::VectorXd::Zero(12), p);
    CHECK(r.status == LbfgsStatus::converged);
    CHECK((r.x - a).norm() < 1e-7);
  }
  SUBCASE("Rosenbrock") {
    const ObjectiveFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      const double a = 1.0 - x(0);
      const double b = x(1) - x(0) * x(0);
      g.resize(2);
      g(0) = -2.0 * a - 400.0 * x(0) * b;
      g(1) = 200.0 * b;
      return a * a + 100.0 * b * b;
    };
    LbfgsParams p;
    p.max_iterations = 500;
    p.gradient_tolerance = 1e-10;
    const LbfgsResult r = lbfgs_minimize(f, Eigen::Vector2d(-1.2, 1.0), p);
    CHECK((r.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-5);
  }
  SUBCASE("start at the minimizer") {
    const ObjectiveFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g = x;
      return 0.5 * x.squaredNorm();
    };
    const LbfgsResult r = lbfgs_minimize(f, Eigen::VectorXd::Zero(4));
    CHECK(r.iterations == 0);
    CHECK(r.status == LbfgsStatus::converged);
  }
  SUBCASE("infinite values are rejected by the line search") {
    // Barrier: f = x - log(x), minimized at x = 1, +inf for x <= 0.
    const ObjectiveFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      g.resize(1);
      if (x(0) <= 0.0) return std::numeric_limits<double>::infinity();
      g(0) = 1.0 - 1.0 / x(0);
      return x(0) - std::log(x(0));
    };
    LbfgsParams p;
    p.max_iterations = 100;
    const LbfgsResult r = lbfgs_minimize(f, Eigen::VectorXd::Constant(1, 40.0), p);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("infeasible start and bad parameters") {
    const ObjectiveFunction f = [](const Eigen::VectorXd&, Eigen::VectorXd&) {
      return std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(lbfgs_minimize(f, Eigen::VectorXd::Zero(2)), InfeasibleError);
    LbfgsParams bad;
    bad.wolfe_c1 = 0.95;
    CHECK_THROWS(bad.validate());
  }
}

TEST_CASE("initialization") {
  SUBCASE("full DCT bank is orthonormal and tight") {
    const FilterBankTransform t = init_transform(4, 16, InitMode::dct, 0);
    const Eigen::MatrixXd& w = t.weights();
    CHECK((w * w.transpose() - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::ArrayXXd grid = gram_eigenvalues(t, 16);
    CHECK(grid.maxCoeff() - grid.minCoeff() < 1e-10);
  }
  SUBCASE("Gaussian draws are deterministic and feasible") {
    CHECK(init_transform(3, 5, InitMode::random_gaussian, 7).weights() ==
          init_transform(3, 5, InitMode::random_gaussian, 7).weights());
    CHECK_FALSE(init_transform(3, 5, InitMode::random_gaussian, 7).weights() ==
                init_transform(3, 5, InitMode::random_gaussian, 8).weights());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const FilterBankTransform t = init_transform(8, 1, InitMode::random_gaussian, seed);
      CHECK(spectrum_report(t, 32).lambda_min > 0.0);
    }
  }
  SUBCASE("partial and oversized DCT banks are feasible") {
    CHECK(is_feasible(init_transform(4, 1, InitMode::dct, 1).weights(), 16));
    const FilterBankTransform big = init_transform(2, 6, InitMode::dct, 1);
    CHECK((big.weights().topRows(4) - dct_basis(2)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("learning") {
  NormalSampler rng(101);
  SUBCASE("fixed point when the data is already sparse under W") {
    LearnConfig cfg;
    cfg.num_channels = 4;
    cfg.filter_size = 2;
    cfg.mu = 0.0;
    cfg.lambda = 0.0;
    cfg.nu = 0.0;
    cfg.outer_iterations = 1;
    const FilterBankTransform start = init_transform(2, 4, InitMode::dct, 0);
    const LearnResult r = learn(TrainingSet::from_images({random_image(8, 8, rng)}), cfg, start);
    CHECK(r.transform.weights() == start.weights());
    CHECK(r.trace.size() == 2);
    CHECK(r.trace[1].inner_iterations == 0);
  }
  SUBCASE("objective is non-increasing") {
    LearnConfig cfg;
    cfg.num_channels = 6;
    cfg.filter_size = 3;
    cfg.nu = 0.05;
    cfg.mu = 0.1;
    cfg.lambda = 1e-3;
    cfg.outer_iterations = 10;
    cfg.seed = 3;
    Image img = random_image(16, 16, rng);
    img = normalize_unit_norm(img).first;
    const LearnResult r = learn(TrainingSet::from_images({img}), cfg);
    REQUIRE(r.trace.size() == 11);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i].objective.total <= r.trace[i - 1].objective.total + 1e-9 * std::abs(r.trace[i - 1].objective.total));
    }
    for (const auto& e : r.trace) {
      const auto& o = e.objective;
      CHECK(o.total == doctest::Approx(o.sparsification_error + cfg.mu * o.j1 + cfg.lambda * o.j2 + o.sparsity_penalty).epsilon(1e-12));
    }
  }
  SUBCASE("image moments and dense patch moments give the same run") {
    LearnConfig cfg;
    cfg.num_channels = 4;
    cfg.filter_size = 2;
    cfg.nu = 0.1;
    cfg.mu = 0.5;
    cfg.lambda = 1e-2;
    cfg.outer_iterations = 3;
    const Image img = random_image(6, 6, rng);
    const LearnResult a = learn(TrainingSet::from_images({img}), cfg);
    const LearnResult b = learn(TrainingSet::from_patches(build_patch_matrix(img, 2, 1).data), cfg);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].objective.total == doctest::Approx(b.trace[i].objective.total).epsilon(1e-8));
    }
  }
  SUBCASE("patch sampling") {
    const Image img = random_image(5, 7, rng);
    const Eigen::MatrixXd p = sample_patches({img}, 3, 50, 9);
    CHECK(p.cols() == 50);
    CHECK(p == sample_patches({img}, 3, 50, 9));
    const Eigen::MatrixXd all = build_patch_matrix(img, 3, 1).data;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      bool found = false;
      for (Eigen::Index c = 0; c < all.cols() && !found; ++c) found = (all.col(c) == p.col(j));
      CHECK(found);
    }
  }
  SUBCASE("invalid configuration") {
    LearnConfig cfg;
    cfg.lbfgs.wolfe_c2 = 1e-5;
    CHECK_THROWS(learn(TrainingSet::from_images({random_image(16, 16, rng)}), cfg));
    LearnConfig ok;
    CHECK_THROWS_AS(learn(TrainingSet{}, ok), ShapeError);
  }
}

TEST_CASE("trace table layout") {
  std::vector<TraceEntry> trace(2);
  trace[1].iteration = 1;
  const CsvTable t = trace_table(trace);
  CHECK(t.header_line() == "iteration,total,f,j1,j2,sparsity,wall_seconds");
  CHECK(t.row_count() == 2);
}

TEST_CASE("training normalization scales with pixel count") {
  NormalSampler rng(91);
  const Image img = random_image(32, 16, rng);
  const Image ref = normalize_for_training(img);
  CHECK(std::sqrt(ref.squared_norm()) == doctest::Approx(std::sqrt(32.0 * 16.0 / (512.0 * 512.0))).epsilon(1e-12));
  CHECK(std::sqrt(normalize_for_training(img, 32 * 16).squared_norm()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ref(3, 5) / img(3, 5) == doctest::Approx(ref(7, 1) / img(7, 1)).epsilon(1e-12));
  CHECK_THROWS(normalize_for_training(Image(4, 4, 0.0)));
}
