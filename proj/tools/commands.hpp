#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbst/denoise.hpp"
#include "fbst/filter_bank.hpp"
#include "fbst/image.hpp"
#include "fbst/learn.hpp"

namespace fbst::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kNumericalError = 3 };

enum class TrainingNormalization { reference, unit, none };

struct LearnOptions {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path model;
  std::filesystem::path trace;    // empty: <model>.trace.csv
  std::filesystem::path montage;  // empty: <model>.filters.pgm
  LearnConfig config;
  TrainingNormalization normalization = TrainingNormalization::reference;
  std::size_t patch_samples = 0;  // 0 uses every patch of every image
  bool verbose = false;
};

struct DenoiseOptions {
  std::filesystem::path model;
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path clean;        // optional ground truth for PSNR
  std::optional<std::uint64_t> add_noise_seed;
  std::filesystem::path noisy_output;  // optional, written when noise is added
  double sigma = 0.0;                  // 0-255 scale
  DenoiseConfig config;                // sigma_hint filled from sigma
};

struct AnalyzeOptions {
  std::filesystem::path model;
  std::size_t grid = 256;
  std::filesystem::path report;  // optional key,value CSV
  std::filesystem::path spectrum;  // optional eigenvalue grid CSV
};

struct PsnrOptions {
  std::filesystem::path reference;
  std::filesystem::path test;
  double peak = 1.0;
  std::filesystem::path csv;  // optional: append a row
  std::string label;
};

struct MontageOptions {
  std::filesystem::path model;
  std::filesystem::path output;
  std::size_t zoom = 1;
};

int cmd_learn(const LearnOptions& options, std::ostream& out, std::ostream& err);
int cmd_denoise(const DenoiseOptions& options, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);
int cmd_psnr(const PsnrOptions& options, std::ostream& out, std::ostream& err);
int cmd_montage(const MontageOptions& options, std::ostream& out, std::ostream& err);

/// Filters tiled on a ceil(sqrt(N_c))-column grid with 1-pixel white
/// separators, each filter min-max normalized to [0, 1] (constant filters
/// map to 0.5), every pixel repeated zoom x zoom times.
Image filter_montage(const FilterBankTransform& transform, std::size_t zoom = 1);

/// Parses `args` (without the program name) and dispatches. A `--config FILE`
/// of key=value lines supplies defaults for the selected subcommand; flags on
/// the command line take precedence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbst::cli
