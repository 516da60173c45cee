#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fbst/csv.hpp"
#include "fbst/filter_bank.hpp"
#include "fbst/image.hpp"
#include "fbst/init.hpp"
#include "fbst/lbfgs.hpp"
#include "fbst/objective.hpp"

namespace fbst {

struct LearnConfig {
  std::size_t num_channels = 64;
  std::size_t filter_size = 8;
  double mu = 3.0;
  double lambda = 7e-4;
  double nu = 5.5e-3;
  std::size_t outer_iterations = 1000;
  std::size_t fft_size = 0;  // 0 selects 4K
  InitMode init = InitMode::random_gaussian;
  std::uint64_t seed = 0;
  LbfgsParams lbfgs;

  std::size_t resolved_fft_size() const noexcept { return fft_size == 0 ? 4 * filter_size : fft_size; }
  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Training data: either whole images (every unit-stride periodic patch is
/// used, moments via FFT) or an explicit K^2 x P matrix of patch columns
/// (dense moments). Exactly one of the two is non-empty.
struct TrainingSet {
  std::vector<Image> images;
  Eigen::MatrixXd patch_samples;

  static TrainingSet from_images(std::vector<Image> images);
  static TrainingSet from_patches(Eigen::MatrixXd patches);
  bool uses_patches() const noexcept { return images.empty(); }
};

/// Number of pixels whose unit-norm images set the scale of the default nu.
inline constexpr std::size_t kReferencePixels = 512 * 512;

/// Scales an image to Euclidean norm sqrt(#pixels / reference_pixels), i.e.
/// unit norm for a 512 x 512 image. Per-pixel magnitudes then no longer
/// depend on image size, so one nu serves crops and full images alike.
/// Throws DegenerateInputError for an all-zero image.
Image normalize_for_training(const Image& image, std::size_t reference_pixels = kReferencePixels);

/// `count` patches drawn uniformly (with replacement) from the periodic
/// patch positions of `images`, as flipped columns (same layout as
/// build_patch_matrix). Deterministic in `seed`.
Eigen::MatrixXd sample_patches(const std::vector<Image>& images, std::size_t filter_size, std::size_t count,
                               std::uint64_t seed);

struct TraceEntry {
  std::size_t iteration = 0;  // 0 is the initial transform
  ObjectiveBreakdown objective;
  double wall_seconds = 0.0;  // since learning started
  std::size_t inner_iterations = 0;
  LbfgsStatus inner_status = LbfgsStatus::converged;
};

struct LearnResult {
  FilterBankTransform transform;
  std::vector<TraceEntry> trace;  // outer_iterations + 1 entries
};

/// Alternating minimization of
///   1/2 ||W X - Z||^2 + mu J1(W) + lambda J2(W) + (nu^2 / 2) ||Z||_0.
/// Each outer iteration runs L-BFGS on W with Z fixed, then sets Z to the
/// hard-thresholded transform of the data. The trace records the objective
/// after the initial sparse coding and after every outer iteration; it is
/// non-increasing because both half-steps are descent steps.
///
/// Called with each trace entry as soon as it is recorded.
using LearnProgress = std::function<void(const TraceEntry&)>;

/// `initial` overrides init_transform(config...). Throws InfeasibleError when
/// the starting point is infeasible.
LearnResult learn(const TrainingSet& training, const LearnConfig& config,
                  const std::optional<FilterBankTransform>& initial = std::nullopt,
                  const LearnProgress& progress = {});

/// CSV with columns iteration,total,f,j1,j2,sparsity,wall_seconds.
CsvTable trace_table(const std::vector<TraceEntry>& trace);

}  // namespace fbst
