#include "fbst/learn.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "fbst/errors.hpp"
#include "fbst/noise.hpp"
#include "fbst/patches.hpp"
#include "fbst/sparse_coding.hpp"

namespace fbst {
namespace {

// The data-dependent half of the objective for the current codes.
struct DataState {
  Moments moments;
  std::size_t nonzeros = 0;
};

class Trainer {
 public:
  Trainer(const TrainingSet& training, const LearnConfig& config) : training_(training), config_(config) {
    const std::size_t k = config.filter_size;
    if (training.uses_patches()) {
      gram_ = training.patch_samples * training.patch_samples.transpose();
    } else {
      gram_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k * k), static_cast<Eigen::Index>(k * k));
      for (const auto& image : training.images) gram_ += image_gram_moment(image, k);
    }
  }

  // Z = prox(W X) and the resulting moments.
  DataState sparse_code(const FilterBankTransform& transform) const {
    DataState state;
    state.moments.gram = gram_;
    if (training_.uses_patches()) {
      Eigen::MatrixXd codes = transform.weights() * training_.patch_samples;
      hard_threshold_in_place(std::span<double>(codes.data(), static_cast<std::size_t>(codes.size())), config_.nu);
      state.moments.cross = training_.patch_samples * codes.transpose();
      state.moments.zsq = codes.squaredNorm();
      state.nonzeros = static_cast<std::size_t>((codes.array() != 0.0).count());
    } else {
      state.moments.cross = Eigen::MatrixXd::Zero(gram_.rows(), static_cast<Eigen::Index>(transform.num_channels()));
      for (const auto& image : training_.images) {
        const CoefficientStack codes = fbst::sparse_code(transform, image, config_.nu);
        state.moments.cross += image_cross_moment(image, codes, config_.filter_size);
        state.moments.zsq += codes.squared_norm();
        state.nonzeros += codes.count_nonzero();
      }
    }
    return state;
  }

  ObjectiveBreakdown evaluate(const Eigen::MatrixXd& weights, const DataState& state) const {
    ObjectiveBreakdown b = objective_and_grad(weights, state.moments, regularizers(), config_.resolved_fft_size()).breakdown;
    b.sparsity_penalty = sparsity_penalty(state.nonzeros, config_.nu);
    b.total += b.sparsity_penalty;
    return b;
  }

  LbfgsResult update_transform(const Eigen::MatrixXd& weights, const DataState& state) const {
    const Eigen::Index rows = weights.rows();
    const Eigen::Index cols = weights.cols();
    const std::size_t fft_size = config_.resolved_fft_size();
    const RegularizerWeights reg = regularizers();
    const ObjectiveFunction f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      const Eigen::Map<const Eigen::MatrixXd> w(x.data(), rows, cols);
      ObjectiveEvaluation e = objective_and_grad(w, state.moments, reg, fft_size);
      grad = Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), e.gradient.size());
      return e.breakdown.total;
    };
    return lbfgs_minimize(f, Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size()), config_.lbfgs);
  }

 private:
  RegularizerWeights regularizers() const { return {config_.mu, config_.lambda}; }

  const TrainingSet& training_;
  const LearnConfig& config_;
  Eigen::MatrixXd gram_;
};

void check_training(const TrainingSet& training, std::size_t filter_size) {
  const bool has_images = !training.images.empty();
  const bool has_patches = training.patch_samples.size() > 0;
  if (has_images == has_patches) throw ShapeError("training set needs either images or patch samples");
  if (has_patches && training.patch_samples.rows() != static_cast<Eigen::Index>(filter_size * filter_size)) {
    throw ShapeError("patch samples have " + std::to_string(training.patch_samples.rows()) + " rows, expected K^2");
  }
  for (const auto& image : training.images) {
    if (image.empty()) throw ShapeError("empty training image");
    if (!image.all_finite()) throw DegenerateInputError("training image has non-finite samples");
  }
}

}  // namespace

void LearnConfig::validate() const {
  if (num_channels == 0 || filter_size == 0) throw std::invalid_argument("channels and filter size must be positive");
  if (!(mu >= 0.0) || !(lambda >= 0.0) || !(nu >= 0.0)) {
    throw std::invalid_argument("mu, lambda and nu must be non-negative");
  }
  if (outer_iterations == 0) throw std::invalid_argument("outer iterations must be positive");
  if (fft_size != 0 && fft_size < 2 * filter_size - 1) throw std::invalid_argument("fft size must be at least 2K - 1");
  lbfgs.validate();
}

TrainingSet TrainingSet::from_images(std::vector<Image> images) {
  TrainingSet t;
  t.images = std::move(images);
  return t;
}

TrainingSet TrainingSet::from_patches(Eigen::MatrixXd patches) {
  TrainingSet t;
  t.patch_samples = std::move(patches);
  return t;
}

Image normalize_for_training(const Image& image, std::size_t reference_pixels) {
  if (reference_pixels == 0) throw ShapeError("reference pixel count must be positive");
  auto [unit, scale] = normalize_unit_norm(image);
  const double target = std::sqrt(static_cast<double>(image.size()) / static_cast<double>(reference_pixels));
  for (double& v : unit.samples()) v *= target;
  return unit;
}

Eigen::MatrixXd sample_patches(const std::vector<Image>& images, std::size_t filter_size, std::size_t count,
                               std::uint64_t seed) {
  if (images.empty()) throw ShapeError("no images to sample patches from");
  std::size_t total = 0;
  for (const auto& image : images) total += image.size();
  if (total == 0) throw ShapeError("images are empty");

  NormalSampler rng(seed);
  const auto k = static_cast<long>(filter_size);
  Eigen::MatrixXd out(k * k, static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    auto index = static_cast<std::size_t>(rng.uniform_open() * static_cast<double>(total));
    if (index >= total) index = total - 1;
    std::size_t which = 0;
    while (index >= images[which].size()) index -= images[which++].size();
    const Image& image = images[which];
    const auto r0 = static_cast<long>(index / image.width());
    const auto c0 = static_cast<long>(index % image.width());
    for (long p = 0; p < k; ++p) {
      for (long q = 0; q < k; ++q) out(p * k + q, static_cast<Eigen::Index>(j)) = image.at_wrapped(r0 - p, c0 - q);
    }
  }
  return out;
}

LearnResult learn(const TrainingSet& training, const LearnConfig& config,
                  const std::optional<FilterBankTransform>& initial, const LearnProgress& progress) {
  config.validate();
  check_training(training, config.filter_size);
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  FilterBankTransform transform = initial ? FilterBankTransform(initial->weights(), config.resolved_fft_size())
                                          : init_transform(config.filter_size, config.num_channels, config.init,
                                                           config.seed, config.resolved_fft_size());
  if (transform.filter_size() != config.filter_size || transform.num_channels() != config.num_channels) {
    throw ShapeError("initial transform does not match the configured K and N_c");
  }

  Trainer trainer(training, config);
  DataState state = trainer.sparse_code(transform);
  LearnResult result{transform, {}};
  result.trace.reserve(config.outer_iterations + 1);
  TraceEntry first{0, trainer.evaluate(transform.weights(), state), elapsed(), 0, LbfgsStatus::converged};
  if (!std::isfinite(first.objective.total)) throw InfeasibleError("initial transform is infeasible");
  result.trace.push_back(first);
  if (progress) progress(first);

  Eigen::MatrixXd weights = transform.weights();
  for (std::size_t it = 1; it <= config.outer_iterations; ++it) {
    const LbfgsResult update = trainer.update_transform(weights, state);
    weights = Eigen::Map<const Eigen::MatrixXd>(update.x.data(), weights.rows(), weights.cols());
    transform = FilterBankTransform(weights, config.resolved_fft_size());
    state = trainer.sparse_code(transform);
    result.trace.push_back({it, trainer.evaluate(weights, state), elapsed(), update.iterations, update.status});
    if (progress) progress(result.trace.back());
  }
  result.transform = transform;
  return result;
}

CsvTable trace_table(const std::vector<TraceEntry>& trace) {
  CsvTable table({"iteration", "total", "f", "j1", "j2", "sparsity", "wall_seconds"});
  for (const auto& e : trace) {
    table.add_row({static_cast<double>(e.iteration), e.objective.total, e.objective.sparsification_error,
                   e.objective.j1, e.objective.j2, e.objective.sparsity_penalty, e.wall_seconds});
  }
  return table;
}

}  // namespace fbst
