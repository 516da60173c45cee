#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "fbst/image.hpp"

namespace fbst {

/// Where the patch for column j sits relative to its grid origin (s*a, s*b).
enum class PatchAnchor {
  /// The origin is the patch's lower-right pixel. With this placement the
  /// product W * X reproduces cyclic convolution outputs without any shift,
  /// so it is the default used by the convolution oracle.
  bottom_right,
  /// The origin is the patch's top-left pixel (the "natural" extraction).
  top_left,
};

/// K^2 x M matrix of vectorized periodic patches.
///
/// Columns enumerate patch origins (s*a, s*b) in raster order, with
/// a < ceil(height/s) and b < ceil(width/s). Within a column the patch is
/// vectorized in *flipped* raster order: the patch's top-left pixel is the
/// final entry and its lower-right pixel the first.
struct PatchMatrix {
  std::size_t patch_size = 0;
  std::size_t stride = 0;
  PatchAnchor anchor = PatchAnchor::bottom_right;
  Eigen::MatrixXd data;
};

/// Extracts every stride-s K x K patch with periodic boundary handling.
/// When s does not divide a dimension, the final row/column of patches wraps
/// around the image edge.
PatchMatrix build_patch_matrix(const Image& image, std::size_t patch_size, std::size_t stride,
                               PatchAnchor anchor = PatchAnchor::bottom_right);

}  // namespace fbst
