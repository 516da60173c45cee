#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fbst/errors.hpp"
#include "fbst/image.hpp"
#include "fbst/noise.hpp"
#include "fbst/patches.hpp"
#include "fbst/pgm.hpp"
#include "support.hpp"

using namespace fbst;
using fbst::testing::random_image;

namespace {

std::string pgm_bytes(const std::string& header, std::initializer_list<int> payload) {
  std::string s = header;
  for (int b : payload) s.push_back(static_cast<char>(b));
  return s;
}

Image counting_image(std::size_t h, std::size_t w) {
  Image img(h, w);
  for (std::size_t n = 0; n < img.size(); ++n) img.samples()[n] = static_cast<double>(n + 1);
  return img;
}

}  // namespace

TEST_CASE("parse_pgm scales by maxval") {
  const Image img = parse_pgm(pgm_bytes("P5\n2 2\n255\n", {0, 255, 128, 64}));
  REQUIRE(img.height() == 2);
  REQUIRE(img.width() == 2);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(0, 1) == 1.0);
  CHECK(img(1, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  CHECK(img(1, 1) == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("parse_pgm handles comments and 16-bit payloads") {
  const Image img = parse_pgm(pgm_bytes("P5\n# comment\n2 1\n# another\n65535\n", {0xFF, 0xFF, 0x80, 0x00}));
  CHECK(img(0, 0) == 1.0);
  CHECK(img(0, 1) == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("parse_pgm reports distinct error kinds") {
  const auto kind_of = [](const std::string& bytes) {
    try {
      parse_pgm(bytes);
    } catch (const PgmParseError& e) {
      return e.kind();
    }
    FAIL("no error raised");
    return PgmErrorKind::malformed_header;
  };
  CHECK(kind_of("P2\n2 2\n255\n0 1 2 3\n") == PgmErrorKind::unsupported_magic);
  CHECK(kind_of(pgm_bytes("P5\n4 4\n255\n", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15})) ==
        PgmErrorKind::truncated_payload);
  CHECK(kind_of("P5\nx 4\n255\n") == PgmErrorKind::malformed_header);
  CHECK(kind_of("P5\n2 2\n70000\n") == PgmErrorKind::malformed_header);
}

TEST_CASE("save_pgm clamps and round-trips quantized data") {
  const auto dir = std::filesystem::temp_directory_path() / "fbst_unit_pgm";
  std::filesystem::create_directories(dir);
  Image img(3, 5);
  for (std::size_t n = 0; n < img.size(); ++n) img.samples()[n] = static_cast<double>((n * 17) % 256) / 255.0;
  save_pgm(img, dir / "q.pgm");
  CHECK(load_pgm(dir / "q.pgm") == img);

  Image out_of_range(1, 2);
  out_of_range(0, 0) = 1.7;
  out_of_range(0, 1) = -0.1;
  const std::string bytes = encode_pgm(out_of_range);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 255);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("normalize_unit_norm") {
  SUBCASE("already unit norm") {
    const auto [img, scale] = normalize_unit_norm(Image(2, 2, 0.5));
    CHECK(scale == doctest::Approx(1.0));
    CHECK(img(1, 1) == doctest::Approx(0.5));
  }
  SUBCASE("pythagorean") {
    const auto [img, scale] = normalize_unit_norm(Image(2, 2, std::vector<double>{3, 4, 0, 0}));
    CHECK(scale == doctest::Approx(5.0));
    CHECK(img(0, 0) == doctest::Approx(0.6));
    CHECK(img(0, 1) == doctest::Approx(0.8));
    CHECK(std::abs(img.norm() - 1.0) < 1e-12);
  }
  SUBCASE("zero image") { CHECK_THROWS_AS(normalize_unit_norm(Image(3, 3)), DegenerateInputError); }
}

TEST_CASE("add_gaussian_noise statistics and determinism") {
  const Image clean(256, 256, 0.5);
  CHECK(add_gaussian_noise(clean, 0.0, 3) == clean);

  const double sigma = 10.0 / 255.0;
  const Image noisy = add_gaussian_noise(clean, sigma, 42);
  double mean = 0.0;
  for (std::size_t n = 0; n < noisy.size(); ++n) mean += noisy.samples()[n] - 0.5;
  mean /= static_cast<double>(noisy.size());
  double var = 0.0;
  for (std::size_t n = 0; n < noisy.size(); ++n) var += std::pow(noisy.samples()[n] - 0.5 - mean, 2);
  const double sd = std::sqrt(var / static_cast<double>(noisy.size() - 1));
  CHECK(sd >= 0.0380);
  CHECK(sd <= 0.0405);
  CHECK(std::abs(mean) < 4.0 * sigma / 256.0);
  CHECK(add_gaussian_noise(clean, sigma, 42) == noisy);
  CHECK_FALSE(add_gaussian_noise(clean, sigma, 43) == noisy);
}

TEST_CASE("psnr definition") {
  const Image x(8, 8, 0.3);
  Image shifted = x;
  for (double& v : shifted.samples()) v += 0.1;
  CHECK(psnr(shifted, x) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::isinf(psnr(x, x)));

  NormalSampler rng(5);
  const Image a = random_image(6, 7, rng);
  const Image b = random_image(6, 7, rng);
  Image a2 = a, b2 = b;
  for (double& v : a2.samples()) v += 3.0;
  for (double& v : b2.samples()) v += 3.0;
  CHECK(psnr(a2, b2) == doctest::Approx(psnr(a, b)).epsilon(1e-12));
}

TEST_CASE("patch matrix reproduces the 3x4 construction example") {
  const Image x = counting_image(3, 4);
  const PatchMatrix pm = build_patch_matrix(x, 2, 2, PatchAnchor::top_left);
  Eigen::MatrixXd expected(4, 4);
  expected << 6, 8, 2, 4,
              5, 7, 1, 3,
              2, 4, 10, 12,
              1, 3, 9, 11;
  CHECK(pm.data == expected);
}

TEST_CASE("patch matrix simple cases") {
  NormalSampler rng(11);
  const Image x = random_image(4, 6, rng);
  SUBCASE("K = 1 gives the raster row") {
    const PatchMatrix pm = build_patch_matrix(x, 1, 1);
    REQUIRE(pm.data.rows() == 1);
    REQUIRE(pm.data.cols() == 24);
    for (std::size_t n = 0; n < x.size(); ++n) CHECK(pm.data(0, static_cast<Eigen::Index>(n)) == x.samples()[n]);
  }
  SUBCASE("non-overlapping patches partition the pixels") {
    const PatchMatrix pm = build_patch_matrix(x, 2, 2);
    CHECK(pm.data.cols() == 6);
    CHECK(pm.data.squaredNorm() == doctest::Approx(x.squared_norm()).epsilon(1e-13));
  }
  SUBCASE("frame sandwich; unit stride covers every pixel K^2 times") {
    for (std::size_t k = 1; k <= 3; ++k) {
      for (std::size_t s = 1; s <= k; ++s) {
        const PatchMatrix pm = build_patch_matrix(x, k, s);
        const double energy = pm.data.squaredNorm();
        CHECK(energy >= x.squared_norm() * (1 - 1e-12));
        CHECK(energy <= static_cast<double>(pm.data.cols()) * x.squared_norm());
        if (s == 1) CHECK(energy == doctest::Approx(static_cast<double>(k * k) * x.squared_norm()).epsilon(1e-12));
      }
    }
  }
  SUBCASE("last entry is the top-left pixel of the patch") {
    const PatchMatrix pm = build_patch_matrix(x, 3, 1);
    // Column for origin (0,0): lower-right pixel is x[0,0], top-left is x[-2,-2].
    CHECK(pm.data(0, 0) == x(0, 0));
    CHECK(pm.data(8, 0) == x.at_wrapped(-2, -2));
  }
}
