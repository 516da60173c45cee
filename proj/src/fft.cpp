#include "fbst/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "fbst/errors.hpp"

namespace fbst::fft {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created with FFTW_ESTIMATE so results do not depend on timing
// measurements and are bit-reproducible from run to run.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, bool forward) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const std::size_t half = cols / 2 + 1;
    double* real = fftw_alloc_real(rows * cols);
    fftw_complex* cplx = fftw_alloc_complex(rows * half);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = forward ? fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols),
                                                    real, cplx, flags)
                             : fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols),
                                                    cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (plan == nullptr) {
      throw Error("FFTW failed to create a plan");
    }
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

HalfSpectrum forward(std::span<const double> samples, std::size_t rows, std::size_t cols) {
  if (samples.size() != rows * cols || rows == 0 || cols == 0) {
    throw ShapeError("fft::forward: sample count does not match grid");
  }
  HalfSpectrum out(rows, cols);
  // r2c does not modify its input, but FFTW's signature is non-const.
  std::vector<double> input(samples.begin(), samples.end());
  fftw_execute_dft_r2c(plan_cache().get(rows, cols, true), input.data(),
                       reinterpret_cast<fftw_complex*>(out.bins.data()));
  return out;
}

HalfSpectrum forward_padded(std::span<const double> taps, std::size_t taps_rows,
                            std::size_t taps_cols, std::size_t rows, std::size_t cols) {
  if (taps.size() != taps_rows * taps_cols) {
    throw ShapeError("fft::forward_padded: tap count does not match shape");
  }
  if (taps_rows > rows || taps_cols > cols) {
    throw ShapeError("fft::forward_padded: filter larger than grid");
  }
  std::vector<double> padded(rows * cols, 0.0);
  for (std::size_t r = 0; r < taps_rows; ++r) {
    for (std::size_t c = 0; c < taps_cols; ++c) padded[r * cols + c] = taps[r * taps_cols + c];
  }
  return forward(padded, rows, cols);
}

std::vector<double> inverse(const HalfSpectrum& spectrum) {
  std::vector<double> out(spectrum.rows * spectrum.cols);
  // c2r overwrites its input.
  std::vector<Complex> scratch = spectrum.bins;
  fftw_execute_dft_c2r(plan_cache().get(spectrum.rows, spectrum.cols, false),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(out.size());
  for (double& v : out) v *= scale;
  return out;
}

void accumulate_power(const HalfSpectrum& spectrum, std::span<double> full_grid) {
  const std::size_t rows = spectrum.rows;
  const std::size_t cols = spectrum.cols;
  if (full_grid.size() != rows * cols) {
    throw ShapeError("fft::accumulate_power: grid size mismatch");
  }
  for (std::size_t k1 = 0; k1 < rows; ++k1) {
    for (std::size_t k2 = 0; k2 < cols; ++k2) {
      Complex bin;
      if (k2 < spectrum.half_cols()) {
        bin = spectrum(k1, k2);
      } else {
        bin = spectrum((rows - k1) % rows, cols - k2);
      }
      full_grid[k1 * cols + k2] += std::norm(bin);
    }
  }
}

}  // namespace fbst::fft
