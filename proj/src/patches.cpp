#include "fbst/patches.hpp"

#include "fbst/errors.hpp"

namespace fbst {

PatchMatrix build_patch_matrix(const Image& image, std::size_t patch_size, std::size_t stride,
                               PatchAnchor anchor) {
  if (patch_size == 0 || stride == 0) {
    throw ShapeError("patch size and stride must be positive");
  }
  if (image.empty()) {
    throw ShapeError("cannot extract patches from an empty image");
  }
  const std::size_t rows_of_patches = (image.height() + stride - 1) / stride;
  const std::size_t cols_of_patches = (image.width() + stride - 1) / stride;
  const long k = static_cast<long>(patch_size);
  const long offset = anchor == PatchAnchor::top_left ? k - 1 : 0;

  PatchMatrix out;
  out.patch_size = patch_size;
  out.stride = stride;
  out.anchor = anchor;
  out.data.resize(static_cast<Eigen::Index>(patch_size * patch_size),
                  static_cast<Eigen::Index>(rows_of_patches * cols_of_patches));

  Eigen::Index col = 0;
  for (std::size_t a = 0; a < rows_of_patches; ++a) {
    for (std::size_t b = 0; b < cols_of_patches; ++b, ++col) {
      const long r0 = static_cast<long>(a * stride) + offset;
      const long c0 = static_cast<long>(b * stride) + offset;
      // Entry m = p*K + q holds the pixel p rows up and q columns left of the
      // anchor pixel, which is the flipped raster order of the patch.
      for (long p = 0; p < k; ++p) {
        for (long q = 0; q < k; ++q) {
          out.data(p * k + q, col) = image.at_wrapped(r0 - p, c0 - q);
        }
      }
    }
  }
  return out;
}

}  // namespace fbst
