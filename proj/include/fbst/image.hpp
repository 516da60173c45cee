#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fbst {

/// Real-valued 2-D sample grid, row-major, double precision.
///
/// Indexing is cyclic wherever the library treats an image as a signal:
/// pixel (r, c) and (r + height, c) are the same sample. `at_wrapped` exposes
/// that convention directly.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, double fill = 0.0);
  Image(std::size_t height, std::size_t width, std::vector<double> samples);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return samples_[r * width_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return samples_[r * width_ + c]; }

  /// Sample at (r, c) taken modulo the image dimensions; negative offsets allowed.
  double at_wrapped(long r, long c) const noexcept;

  std::span<double> samples() noexcept { return samples_; }
  std::span<const double> samples() const noexcept { return samples_; }

  double squared_norm() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;
  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> samples_;
};

/// Scales `image` to unit Euclidean norm. Returns the scaled image and the
/// factor that restores the original (original = scaled * scale).
/// Throws DegenerateInputError for an all-zero image.
std::pair<Image, double> normalize_unit_norm(const Image& image);

/// Sum of squared differences; shapes must agree.
double squared_distance(const Image& a, const Image& b);

/// Peak signal-to-noise ratio in dB: 20 log10(peak * sqrt(#pixels) / ||x - x_star||).
/// Returns +infinity when the images are identical.
double psnr(const Image& x, const Image& x_star, double peak = 1.0);

}  // namespace fbst
