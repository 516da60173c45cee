#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fbst::fft {

using Complex = std::complex<double>;

/// Non-redundant half of the unnormalized 2-D DFT of a real rows x cols grid:
/// rows x (cols/2 + 1) bins, row-major. The remaining bins follow from
/// conjugate symmetry X[k1, k2] = conj(X[-k1, -k2]).
struct HalfSpectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> bins;

  HalfSpectrum() = default;
  HalfSpectrum(std::size_t rows_, std::size_t cols_)
      : rows(rows_), cols(cols_), bins(rows_ * (cols_ / 2 + 1)) {}

  std::size_t half_cols() const noexcept { return cols / 2 + 1; }
  Complex& operator()(std::size_t k1, std::size_t k2) noexcept { return bins[k1 * half_cols() + k2]; }
  Complex operator()(std::size_t k1, std::size_t k2) const noexcept {
    return bins[k1 * half_cols() + k2];
  }
};

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-2 pi i k.n / N).
HalfSpectrum forward(std::span<const double> samples, std::size_t rows, std::size_t cols);

/// Forward DFT of a small `taps_rows` x `taps_cols` array zero-padded to
/// rows x cols with its [0, 0] tap at the origin.
HalfSpectrum forward_padded(std::span<const double> taps, std::size_t taps_rows,
                            std::size_t taps_cols, std::size_t rows, std::size_t cols);

/// Inverse DFT including the 1/(rows*cols) factor, so inverse(forward(x)) == x.
std::vector<double> inverse(const HalfSpectrum& spectrum);

/// Number of full-grid bins represented by half-spectrum column k2 (1 or 2).
inline std::size_t bin_multiplicity(std::size_t k2, std::size_t cols) noexcept {
  return (k2 == 0 || (cols % 2 == 0 && k2 == cols / 2)) ? 1 : 2;
}

/// Expands a half spectrum's squared magnitudes onto the full rows x cols grid.
void accumulate_power(const HalfSpectrum& spectrum, std::span<double> full_grid);

}  // namespace fbst::fft
