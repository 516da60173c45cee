#include "fbst/sparse_coding.hpp"

#include "fbst/errors.hpp"

namespace fbst {

void hard_threshold_in_place(std::span<double> values, double nu) {
  if (!(nu >= 0.0)) {
    throw ShapeError("threshold must be non-negative");
  }
  const double nu2 = nu * nu;
  for (double& v : values) {
    if (!(v * v > nu2)) v = 0.0;
  }
}

std::vector<double> hard_threshold(std::span<const double> values, double nu) {
  std::vector<double> out(values.begin(), values.end());
  hard_threshold_in_place(out, nu);
  return out;
}

CoefficientStack hard_threshold(const CoefficientStack& coefficients, double nu) {
  CoefficientStack out = coefficients;
  for (auto& ch : out.channels) hard_threshold_in_place(ch.samples(), nu);
  return out;
}

CoefficientStack sparse_code(const FilterBankTransform& transform, const Image& image, double nu) {
  CoefficientStack z = analyze(transform, image);
  for (auto& ch : z.channels) hard_threshold_in_place(ch.samples(), nu);
  return z;
}

}  // namespace fbst
