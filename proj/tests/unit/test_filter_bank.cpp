#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fbst/errors.hpp"
#include "fbst/filter_bank.hpp"
#include "fbst/init.hpp"
#include "fbst/model_io.hpp"
#include "fbst/patches.hpp"
#include "fbst/spectrum.hpp"
#include "support.hpp"

using namespace fbst;
using fbst::testing::direct_convolution;
using fbst::testing::random_image;
using fbst::testing::random_matrix;
using fbst::testing::uniform_index;

namespace {

Eigen::MatrixXd delta_bank(std::size_t k) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(k * k));
  w(0, 0) = 1.0;
  return w;
}

// Rows are zero-mean (x, y) first differences padded to K x K.
Eigen::MatrixXd zero_mean_bank(std::size_t k) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(k * k));
  w(0, 0) = 1.0;
  w(0, 1) = -1.0;
  w(1, 0) = 1.0;
  w(1, static_cast<Eigen::Index>(k)) = -1.0;
  return w;
}

// Dense N^2 x N^2 matrix of H*H from its action on the standard basis.
Eigen::MatrixXd dense_gram(const FilterBankTransform& t, std::size_t n) {
  const BoundFilterBank bank(t, n, n);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(n * n));
  for (std::size_t j = 0; j < n * n; ++j) {
    Image e(n, n);
    e.samples()[j] = 1.0;
    const Image col = bank.adjoint(bank.analyze(e));
    for (std::size_t i = 0; i < n * n; ++i) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col.samples()[i];
  }
  return g;
}

}  // namespace

TEST_CASE("filter_from_row is a raster reshape and invertible") {
  const std::vector<double> row{1, 2, 3, 4};
  const Image h = filter_from_row(row, 2);
  CHECK(h(0, 0) == 1);
  CHECK(h(0, 1) == 2);
  CHECK(h(1, 0) == 3);
  CHECK(h(1, 1) == 4);
  CHECK(row_from_filter(h) == row);
  CHECK_THROWS_AS(filter_from_row(row, 3), ShapeError);

  std::vector<double> e1(9, 0.0);
  e1[0] = 1.0;
  const Image delta = filter_from_row(e1, 3);
  CHECK(delta(0, 0) == 1.0);
  CHECK(delta.squared_norm() == 1.0);
}

TEST_CASE("transform validation") {
  CHECK_THROWS_AS(FilterBankTransform(Eigen::MatrixXd::Ones(2, 5)), ShapeError);
  CHECK_THROWS_AS(FilterBankTransform(Eigen::MatrixXd::Ones(2, 9), 4), ShapeError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 4);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(FilterBankTransform{bad}, ShapeError);
  CHECK(FilterBankTransform(Eigen::MatrixXd::Ones(2, 9)).fft_size() == 12);
}

TEST_CASE("analyze matches direct convolution and the patch-matrix product") {
  NormalSampler rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = uniform_index(rng, 1, 5);
    const std::size_t nc = uniform_index(rng, 1, 5);
    const std::size_t h = uniform_index(rng, k, 13);
    const std::size_t w = uniform_index(rng, k, 13);
    const FilterBankTransform t(random_matrix(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(k * k), rng));
    const Image x = random_image(h, w, rng);
    const CoefficientStack y = analyze(t, x);
    const Eigen::MatrixXd product = t.weights() * build_patch_matrix(x, k, 1).data;
    for (std::size_t i = 0; i < nc; ++i) {
      const Image direct = direct_convolution(x, t.impulse_response(i));
      for (std::size_t n = 0; n < x.size(); ++n) {
        CHECK(std::abs(y.channels[i].samples()[n] - direct.samples()[n]) < 1e-10);
        CHECK(std::abs(y.channels[i].samples()[n] - product(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n))) < 1e-10);
      }
    }
  }
}

TEST_CASE("analyze trivial cases") {
  NormalSampler rng(3);
  const Image x = random_image(6, 5, rng);
  const Image through_delta = analyze(FilterBankTransform(delta_bank(3)), x).channels[0];
  for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(through_delta.samples()[n] - x.samples()[n]) < 1e-14);

  const FilterBankTransform t(random_matrix(2, 9, rng));
  const CoefficientStack y = analyze(t, Image(7, 7, 2.0));
  for (std::size_t i = 0; i < 2; ++i) {
    const double dc = 2.0 * t.weights().row(static_cast<Eigen::Index>(i)).sum();
    for (double v : y.channels[i].samples()) CHECK(v == doctest::Approx(dc).epsilon(1e-12));
  }
}

TEST_CASE("adjoint identity") {
  NormalSampler rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const FilterBankTransform t(random_matrix(3, 9, rng));
    const Image x = random_image(8, 8, rng);
    CoefficientStack y;
    for (int i = 0; i < 3; ++i) y.channels.push_back(random_image(8, 8, rng));
    const double lhs = analyze(t, x).dot(y);
    const Image ay = adjoint(t, y);
    double rhs = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) rhs += x.samples()[n] * ay.samples()[n];
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
  const FilterBankTransform delta(delta_bank(2));
  const Image chan = random_image(5, 5, rng);
  CoefficientStack single;
  single.channels.push_back(chan);
  const Image back = adjoint(delta, single);
  for (std::size_t n = 0; n < chan.size(); ++n) CHECK(back.samples()[n] == doctest::Approx(chan.samples()[n]));
  CHECK(adjoint(delta, CoefficientStack::zeros(1, 4, 4)).squared_norm() == 0.0);
  CHECK_THROWS_AS(adjoint(FilterBankTransform(random_matrix(2, 4, rng)), single), ShapeError);
}

TEST_CASE("gram eigenvalues equal the dense Gram spectrum") {
  NormalSampler rng(99);
  for (std::size_t nc : {1, 2, 4}) {
    for (std::size_t k : {1, 2, 3}) {
      const std::size_t n = 6;
      const FilterBankTransform t(random_matrix(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(k * k), rng), 2 * k + 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_gram(t, n));
      std::vector<double> dense(solver.eigenvalues().data(), solver.eigenvalues().data() + n * n);
      const Eigen::ArrayXXd grid = gram_eigenvalues(t, n);
      std::vector<double> fast(grid.data(), grid.data() + grid.size());
      std::sort(dense.begin(), dense.end());
      std::sort(fast.begin(), fast.end());
      for (std::size_t i = 0; i < dense.size(); ++i) CHECK(std::abs(dense[i] - fast[i]) < 1e-8);
    }
  }
}

TEST_CASE("gram eigenvalue conventions") {
  const FilterBankTransform delta(delta_bank(2));
  const Eigen::ArrayXXd ortho = gram_eigenvalues(delta, 8, DftNormalization::orthonormal);
  CHECK((ortho - 1.0 / 64.0).abs().maxCoeff() < 1e-15);
  CHECK((gram_eigenvalues(delta, 8) - 1.0).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(gram_eigenvalues(delta, 1), ShapeError);

  const FilterBankTransform dct(dct_basis(3));
  CHECK((gram_eigenvalues(dct, 8) - 9.0).abs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_gram(dct, 8));
  CHECK((solver.eigenvalues().array() - 9.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("autocorrelation spectrum agrees with gram eigenvalues") {
  NormalSampler rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    const FilterBankTransform t(random_matrix(4, 9, rng));
    for (std::size_t n : {5, 8, 11, 16}) {
      for (auto norm : {DftNormalization::unnormalized, DftNormalization::orthonormal}) {
        const double diff = (gram_eigenvalues(t, n, norm) - autocorrelation_spectrum(t, n, norm)).abs().maxCoeff();
        CHECK(diff < 1e-10);
      }
    }
  }
  const FilterBankTransform delta(delta_bank(3));
  CHECK((autocorrelation_spectrum(delta, 5) - 1.0).abs().maxCoeff() < 1e-14);
  const Eigen::MatrixXd one = random_matrix(1, 4, rng);
  Eigen::MatrixXd two(2, 4);
  two << one, one;
  CHECK((autocorrelation_spectrum(FilterBankTransform(two), 6) - 2.0 * autocorrelation_spectrum(FilterBankTransform(one), 6))
            .abs()
            .maxCoeff() < 1e-12);
  CHECK_THROWS_AS(autocorrelation_spectrum(FilterBankTransform(random_matrix(1, 9, rng)), 4), ShapeError);
}

TEST_CASE("nested grids: coarse grid samples are a subset of the fine grid") {
  NormalSampler rng(8);
  const FilterBankTransform t(random_matrix(3, 9, rng));
  const Eigen::ArrayXXd coarse = gram_eigenvalues(t, 8);
  const Eigen::ArrayXXd fine = gram_eigenvalues(t, 16);
  for (Eigen::Index a = 0; a < 8; ++a) {
    for (Eigen::Index b = 0; b < 8; ++b) CHECK(coarse(a, b) == doctest::Approx(fine(2 * a, 2 * b)).epsilon(1e-12));
  }
  CHECK(coarse.minCoeff() >= fine.minCoeff() - 1e-12);
}

TEST_CASE("spectrum report verdicts") {
  SUBCASE("zero-mean bank has a common zero at DC") {
    const SpectrumReport r = spectrum_report(FilterBankTransform(zero_mean_bank(3)), 16);
    CHECK_FALSE(r.cyclic_pr);
    CHECK_FALSE(r.linear_pr_certified);
    CHECK(r.argmin_row == 0);
    CHECK(r.argmin_col == 0);
    CHECK(std::isinf(r.condition_number));
  }
  SUBCASE("full DCT bank is tight") {
    const SpectrumReport r = spectrum_report(FilterBankTransform(dct_basis(8)), 256);
    CHECK(r.cyclic_pr);
    CHECK(r.condition_number == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.linear_pr_threshold == doctest::Approx(256.0 / 7.0 - 1.0));
    CHECK(r.linear_pr_certified);
  }
  SUBCASE("delta filter is PR for every admissible grid") {
    for (std::size_t n = 3; n < 10; ++n) {
      const SpectrumReport r = spectrum_report(FilterBankTransform(delta_bank(2)), n);
      CHECK(r.condition_number == doctest::Approx(1.0));
      CHECK(r.linear_pr_certified);
    }
  }
  SUBCASE("threshold arithmetic") {
    CHECK(linear_pr_threshold(256, 8) == doctest::Approx(35.5714).epsilon(1e-4));
    CHECK(linear_pr_threshold(32, 8) == doctest::Approx(3.5714).epsilon(1e-4));
    CHECK(2.9 <= linear_pr_threshold(32, 8));
    CHECK(std::isinf(linear_pr_threshold(10, 1)));
  }
  SUBCASE("report invariants on a random bank") {
    NormalSampler rng(77);
    const FilterBankTransform t(random_matrix(5, 16, rng));
    const SpectrumReport r = spectrum_report(t, 12);
    CHECK(r.eigenvalue_grid.minCoeff() >= 0.0);
    CHECK(r.lambda_min == r.eigenvalue_grid.minCoeff());
    CHECK(r.lambda_max == r.eigenvalue_grid.maxCoeff());
    CHECK(r.condition_number == doctest::Approx(r.lambda_max / r.lambda_min));
    CHECK(r.linear_pr_certified == (r.cyclic_pr && r.condition_number <= r.linear_pr_threshold));
  }
}

TEST_CASE("frame sandwich and pseudoinverse") {
  NormalSampler rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const FilterBankTransform t(random_matrix(6, 9, rng));
    const Image x = random_image(16, 16, rng);
    const SpectrumReport r = spectrum_report(t, 16);
    REQUIRE(r.cyclic_pr);
    const double energy = analyze(t, x).squared_norm();
    CHECK(energy >= r.lambda_min * x.squared_norm() * (1 - 1e-12));
    CHECK(energy <= r.lambda_max * x.squared_norm() * (1 + 1e-12));
    const Image back = pseudoinverse_apply(t, analyze(t, x), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(back.samples()[n] - x.samples()[n]) < 1e-8);
  }
  const Image x = random_image(9, 7, rng);
  const Image same = pseudoinverse_apply(FilterBankTransform(delta_bank(2)), analyze(FilterBankTransform(delta_bank(2)), x));
  for (std::size_t n = 0; n < x.size(); ++n) CHECK(same.samples()[n] == doctest::Approx(x.samples()[n]));
  const FilterBankTransform singular(zero_mean_bank(2));
  CHECK_THROWS_AS(pseudoinverse_apply(singular, analyze(singular, x), 0.0), SingularOperatorError);
  CHECK_NOTHROW(pseudoinverse_apply(singular, analyze(singular, x), 0.5));
}

TEST_CASE("filter norms and row coherence") {
  Eigen::MatrixXd w(2, 4);
  w << 3, 4, 0, 0,
       0, 0, 0, 2;
  const FilterBankTransform t(w);
  const auto norms = filter_norms(t);
  CHECK(norms[0] == doctest::Approx(5.0));
  CHECK(norms[1] == doctest::Approx(2.0));
  CHECK(max_row_coherence(t) == 0.0);
  Eigen::MatrixXd dup(2, 4);
  dup << 1, 2, 3, 4,
         -2, -4, -6, -8;
  CHECK(max_row_coherence(FilterBankTransform(dup)) == doctest::Approx(1.0));
  CHECK(max_row_coherence(FilterBankTransform(delta_bank(2))) == 0.0);
}

TEST_CASE("model file round trip and corruption detection") {
  NormalSampler rng(5);
  const FilterBankTransform t(random_matrix(4, 9, rng), 12);
  const std::string bytes = encode_model(t);
  CHECK(bytes.size() == 20 + 8 * 36 + 4);
  CHECK(bytes.substr(0, 4) == "FBST");
  const FilterBankTransform back = decode_model(bytes);
  CHECK(back.weights() == t.weights());
  CHECK(back.fft_size() == 12);

  const auto kind_of = [](const std::string& b) {
    try {
      decode_model(b);
    } catch (const ModelFormatError& e) {
      return e.kind();
    }
    FAIL("no error raised");
    return ModelErrorKind::invalid_header;
  };
  std::string flipped = bytes;
  flipped[30] = static_cast<char>(flipped[30] ^ 0x01);
  CHECK(kind_of(flipped) == ModelErrorKind::crc_mismatch);
  CHECK(kind_of(bytes.substr(0, bytes.size() - 9)) == ModelErrorKind::truncated);
  CHECK(kind_of("XXXX" + bytes.substr(4)) == ModelErrorKind::bad_magic);
  std::string version = bytes;
  version[4] = 9;
  CHECK(kind_of(version) == ModelErrorKind::unsupported_version);

  const auto dir = std::filesystem::temp_directory_path() / "fbst_unit_model";
  std::filesystem::create_directories(dir);
  save_model(t, dir / "m.fbst");
  CHECK(load_model(dir / "m.fbst").weights() == t.weights());
  save_metadata({{"mu", "3"}, {"note", "a b"}}, metadata_path(dir / "m.fbst"));
  const ModelMetadata meta = load_metadata(metadata_path(dir / "m.fbst"));
  REQUIRE(meta.size() == 2);
  CHECK(meta[1].second == "a b");
  CHECK_THROWS_AS(load_model(dir / "missing.fbst"), IoError);
  std::filesystem::remove_all(dir);
}
