#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "fbst/csv.hpp"
#include "fbst/errors.hpp"
#include "fbst/model_io.hpp"
#include "fbst/noise.hpp"
#include "fbst/pgm.hpp"
#include "fbst/spectrum.hpp"

namespace fbst::cli {
namespace {

std::string fixed(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

std::string general(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(6) << value;
  return s.str();
}

// Maps library exceptions to exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InfeasibleError& e) {
    err << "error: numerically infeasible: " << e.what() << "\n";
    return kNumericalError;
  } catch (const SingularOperatorError& e) {
    err << "error: " << e.what() << "\n"
        << "hint: the bank is not perfect-reconstruction at this size; inspect it with `fbst analyze --model ...`\n";
    return kNumericalError;
  } catch (const ModelFormatError& e) {
    err << "error: corrupt or unsupported model: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

Image apply_normalization(const Image& image, TrainingNormalization mode) {
  switch (mode) {
    case TrainingNormalization::reference: return normalize_for_training(image);
    case TrainingNormalization::unit: return normalize_unit_norm(image).first;
    case TrainingNormalization::none: return image;
  }
  return image;
}

std::string to_string(TrainingNormalization mode) {
  switch (mode) {
    case TrainingNormalization::reference: return "reference";
    case TrainingNormalization::unit: return "unit";
    case TrainingNormalization::none: return "none";
  }
  return "reference";
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const std::string& suffix) {
  return std::filesystem::path(base.string() + suffix);
}

ModelMetadata learn_metadata(const LearnOptions& o, const LearnResult& result) {
  const LearnConfig& c = o.config;
  ModelMetadata meta{
      {"channels", std::to_string(c.num_channels)},
      {"filter_size", std::to_string(c.filter_size)},
      {"fft_size", std::to_string(c.resolved_fft_size())},
      {"mu", format_number(c.mu)},
      {"lambda", format_number(c.lambda)},
      {"nu", format_number(c.nu)},
      {"outer_iterations", std::to_string(c.outer_iterations)},
      {"init", std::string(to_string(c.init))},
      {"seed", std::to_string(c.seed)},
      {"normalize", to_string(o.normalization)},
      {"patch_samples", std::to_string(o.patch_samples)},
      {"final_objective", format_number(result.trace.back().objective.total)},
  };
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    meta.emplace_back("input" + std::to_string(i), o.inputs[i].filename().string());
  }
  return meta;
}

}  // namespace

Image filter_montage(const FilterBankTransform& transform, std::size_t zoom) {
  if (zoom == 0) throw std::invalid_argument("montage zoom must be positive");
  const std::size_t n = transform.num_channels();
  const std::size_t k = transform.filter_size() * zoom;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
  const std::size_t rows = (n + cols - 1) / cols;
  Image montage(rows * (k + 1) + 1, cols * (k + 1) + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Image h = transform.impulse_response(i);
    const auto [lo, hi] = std::minmax_element(h.samples().begin(), h.samples().end());
    const double range = *hi - *lo;
    const std::size_t top = (i / cols) * (k + 1) + 1;
    const std::size_t left = (i % cols) * (k + 1) + 1;
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        const double v = h(r / zoom, c / zoom);
        montage(top + r, left + c) = range > 0.0 ? (v - *lo) / range : 0.5;
      }
    }
  }
  return montage;
}

int cmd_learn(const LearnOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.inputs.empty()) throw std::invalid_argument("learn needs at least one training image");
    if (o.model.empty()) throw std::invalid_argument("learn needs --output");
    o.config.validate();

    std::vector<Image> images;
    for (const auto& path : o.inputs) images.push_back(apply_normalization(load_pgm(path), o.normalization));
    const TrainingSet training =
        o.patch_samples > 0
            ? TrainingSet::from_patches(sample_patches(images, o.config.filter_size, o.patch_samples, o.config.seed))
            : TrainingSet::from_images(std::move(images));

    LearnProgress progress;
    if (o.verbose) {
      progress = [&err](const TraceEntry& e) {
        err << "iter " << e.iteration << " total " << general(e.objective.total) << " f "
            << general(e.objective.sparsification_error) << " j1 " << general(e.objective.j1) << " j2 "
            << general(e.objective.j2) << " inner " << e.inner_iterations << " (" << to_string(e.inner_status)
            << ")\n";
      };
    }
    const LearnResult result = learn(training, o.config, std::nullopt, progress);

    const auto trace_path = o.trace.empty() ? with_suffix(o.model, ".trace.csv") : o.trace;
    const auto montage_path = o.montage.empty() ? with_suffix(o.model, ".filters.pgm") : o.montage;
    save_model(result.transform, o.model);
    save_metadata(learn_metadata(o, result), metadata_path(o.model));
    trace_table(result.trace).write(trace_path);
    save_pgm(filter_montage(result.transform), montage_path);

    const SpectrumReport report = spectrum_report(result.transform, result.transform.fft_size());
    out << "model: " << o.model.string() << " (N_c=" << result.transform.num_channels()
        << ", K=" << result.transform.filter_size() << ", N_F=" << result.transform.fft_size() << ")\n"
        << "objective: " << general(result.trace.front().objective.total) << " -> "
        << general(result.trace.back().objective.total) << " over " << o.config.outer_iterations
        << " iterations\n"
        << "condition number (N_F grid): " << general(report.condition_number) << "\n"
        << "trace: " << trace_path.string() << "\n"
        << "montage: " << montage_path.string() << "\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.model.empty()) throw std::invalid_argument("analyze needs --model");
    const FilterBankTransform t = load_model(o.model);
    const SpectrumReport r = spectrum_report(t, o.grid);
    const std::vector<double> norms = filter_norms(t);
    const auto [nmin, nmax] = std::minmax_element(norms.begin(), norms.end());
    double nmean = 0.0;
    for (double v : norms) nmean += v / static_cast<double>(norms.size());
    const double coherence = max_row_coherence(t);

    std::vector<std::pair<std::string, std::string>> rows{
        {"channels", std::to_string(t.num_channels())},
        {"filter_size", std::to_string(t.filter_size())},
        {"grid", std::to_string(r.grid_size)},
        {"lambda_min", general(r.lambda_min)},
        {"lambda_max", general(r.lambda_max)},
        {"condition_number", general(r.condition_number)},
        {"lambda_min_frequency", "(" + std::to_string(r.argmin_row) + "," + std::to_string(r.argmin_col) + ")"},
        {"cyclic_pr", r.cyclic_pr ? "yes" : "no"},
        {"linear_pr_threshold", fixed(r.linear_pr_threshold, 3)},
        {"linear_pr_certified", r.linear_pr_certified ? "yes" : "no"},
        {"filter_norm_min", general(*nmin)},
        {"filter_norm_max", general(*nmax)},
        {"filter_norm_mean", general(nmean)},
        {"max_row_coherence", general(coherence)},
    };
    out << "model: " << o.model.string() << "\n";
    for (const auto& [k, v] : rows) out << k << ": " << v << "\n";
    if (!r.cyclic_pr) {
      const bool dc = r.argmin_row == 0 && r.argmin_col == 0;
      out << "verdict: not perfect-reconstruction; all filters share a zero at frequency (" << r.argmin_row << ","
          << r.argmin_col << ")" << (dc ? " (DC)" : "") << "\n";
    } else {
      out << "verdict: frame with bounds [" << general(r.lambda_min) << ", " << general(r.lambda_max) << "]; linear PR "
          << (r.linear_pr_certified ? "certified" : "not certified") << " (kappa " << general(r.condition_number)
          << (r.linear_pr_certified ? " <= " : " > ") << fixed(r.linear_pr_threshold, 3) << ")\n";
    }

    if (!o.report.empty()) {
      CsvTable table({"key", "value"});
      for (const auto& [k, v] : rows) table.add_text_row({k, k == "lambda_min_frequency" ? v.substr(1, v.size() - 2) : v});
      for (std::size_t i = 0; i < norms.size(); ++i) table.add_text_row({"filter_norm_" + std::to_string(i), format_number(norms[i])});
      table.write(o.report);
    }
    if (!o.spectrum.empty()) {
      CsvTable table({"k1", "k2", "lambda"});
      for (Eigen::Index a = 0; a < r.eigenvalue_grid.rows(); ++a) {
        for (Eigen::Index b = 0; b < r.eigenvalue_grid.cols(); ++b) {
          table.add_row({static_cast<double>(a), static_cast<double>(b), r.eigenvalue_grid(a, b)});
        }
      }
      table.write(o.spectrum);
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.model.empty()) throw std::invalid_argument("denoise needs --model");
    if (o.input.empty() || o.output.empty()) throw std::invalid_argument("denoise needs --input and --output");
    if (!(o.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    const FilterBankTransform t = load_model(o.model);
    const Image input = load_pgm(o.input);

    Image noisy = input;
    std::optional<Image> clean;
    if (!o.clean.empty()) clean = load_pgm(o.clean);
    if (o.add_noise_seed) {
      noisy = add_gaussian_noise(input, o.sigma / 255.0, *o.add_noise_seed);
      if (!clean) clean = input;
      if (!o.noisy_output.empty()) save_pgm(noisy, o.noisy_output);
    }

    DenoiseConfig config = o.config;
    config.sigma_hint = o.sigma / 255.0;
    const ResolvedDenoiseConfig r = resolve(config, t);
    if (r.mode == DenoiseMode::threshold) {
      const SpectrumReport report = spectrum_report(t, std::max(noisy.height(), noisy.width()));
      if (!report.cyclic_pr) {
        throw SingularOperatorError("threshold mode needs a perfect-reconstruction bank (lambda_min = " +
                                    general(report.lambda_min) + ")");
      }
    }
    const Image result = r.mode == DenoiseMode::threshold
                             ? denoise_threshold(t, noisy, r.nu)
                             : denoise_iterative(t, noisy, r.nu, r.lambda_r, r.iterations).output;
    save_pgm(result, o.output);

    out << "mode: " << to_string(r.mode) << "\n" << "nu: " << general(r.nu) << "\n";
    if (r.mode == DenoiseMode::iterative) {
      out << "lambda_r: " << general(r.lambda_r) << "\n" << "iterations: " << r.iterations << "\n";
    }
    if (clean) {
      out << "psnr_input: " << fixed(psnr(noisy, *clean), 2) << "\n"
          << "psnr_output: " << fixed(psnr(result, *clean), 2) << "\n";
    }
    out << "output: " << o.output.string() << "\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_psnr(const PsnrOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(o.peak > 0.0)) throw std::invalid_argument("peak must be positive");
    const Image a = load_pgm(o.reference);
    const Image b = load_pgm(o.test);
    const double value = psnr(b, a, o.peak);
    const std::string text = fixed(value, 2);
    out << text << "\n";
    if (!o.csv.empty()) {
      CsvTable table({"label", "reference", "test", "psnr_db"});
      table.add_text_row({o.label.empty() ? o.test.filename().string() : o.label, o.reference.string(),
                          o.test.string(), text});
      table.append(o.csv);
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_montage(const MontageOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.model.empty() || o.output.empty()) throw std::invalid_argument("montage needs --model and --output");
    const FilterBankTransform t = load_model(o.model);
    save_pgm(filter_montage(t, o.zoom), o.output);
    out << "montage: " << o.output.string() << "\n";
    return static_cast<int>(kSuccess);
  });
}

namespace {

struct Options {
  LearnOptions learn;
  DenoiseOptions denoise;
  AnalyzeOptions analyze;
  PsnrOptions psnr;
  MontageOptions montage;
  std::string config_file;
  std::string init = "random_gaussian";
  std::string normalize = "reference";
  std::string mode = "iterative";
  std::string nu_schedule = "noise_relative";
  std::optional<double> denoise_nu;
  std::optional<double> lambda_r;
  std::optional<std::size_t> denoise_iters;
  std::optional<std::uint64_t> noise_seed;
};

template <class T>
CLI::Option* scalar(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option(name, value, help)->capture_default_str()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_config(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_file, "key=value file supplying defaults for this command's flags")
      ->check(CLI::ExistingFile);
}

void build(CLI::App& app, Options& o) {
  app.require_subcommand(1);

  CLI::App* learn = app.add_subcommand("learn", "Learn a filter-bank sparsifying transform from PGM images");
  learn->add_option("images", o.learn.inputs, "training images (binary PGM)")->required()->check(CLI::ExistingFile);
  scalar(learn, "-o,--output", o.learn.model, "model file to write")->required();
  scalar(learn, "--trace", o.learn.trace, "objective trace CSV (default <output>.trace.csv)");
  scalar(learn, "--montage", o.learn.montage, "filter montage PGM (default <output>.filters.pgm)");
  scalar(learn, "--channels", o.learn.config.num_channels, "number of channels N_c");
  scalar(learn, "--filter-size", o.learn.config.filter_size, "filter size K");
  scalar(learn, "--iters", o.learn.config.outer_iterations, "outer iterations");
  scalar(learn, "--mu", o.learn.config.mu, "frame regularizer weight");
  scalar(learn, "--lambda", o.learn.config.lambda, "coherence barrier weight");
  scalar(learn, "--nu", o.learn.config.nu, "hard threshold during learning (normalized image units)");
  scalar(learn, "--fft-size", o.learn.config.fft_size, "regularizer DFT grid N_F (0 selects 4K)");
  scalar(learn, "--init", o.init, "initialization: random_gaussian | dct");
  scalar(learn, "--seed", o.learn.config.seed, "random seed");
  scalar(learn, "--normalize", o.normalize, "training image scaling: reference (unit norm at 512x512) | unit | none");
  scalar(learn, "--patches", o.learn.patch_samples, "train on this many random patches (0 uses all patches)");
  scalar(learn, "--lbfgs-memory", o.learn.config.lbfgs.memory, "L-BFGS memory");
  scalar(learn, "--lbfgs-iters", o.learn.config.lbfgs.max_iterations, "L-BFGS iterations per transform update");
  scalar(learn, "--grad-tol", o.learn.config.lbfgs.gradient_tolerance, "L-BFGS max-abs gradient tolerance");
  scalar(learn, "--wolfe-c1", o.learn.config.lbfgs.wolfe_c1, "sufficient decrease constant");
  scalar(learn, "--wolfe-c2", o.learn.config.lbfgs.wolfe_c2, "curvature constant");
  learn->add_flag("-v,--verbose", o.learn.verbose, "print the objective after every outer iteration");
  add_config(learn, o);

  CLI::App* denoise = app.add_subcommand("denoise", "Denoise a PGM image with a learned bank");
  scalar(denoise, "--model", o.denoise.model, "model file")->required();
  scalar(denoise, "-i,--input", o.denoise.input, "noisy input PGM")->required();
  scalar(denoise, "-o,--output", o.denoise.output, "denoised output PGM")->required();
  scalar(denoise, "--mode", o.mode, "iterative | threshold");
  scalar(denoise, "--sigma", o.denoise.sigma, "noise standard deviation on the 0-255 scale");
  scalar(denoise, "--nu", o.denoise_nu, "hard threshold (peak-1 units); default from --nu-schedule");
  scalar(denoise, "--nu-schedule", o.nu_schedule, "default threshold rule: noise_relative | literal");
  scalar(denoise, "--tau", o.denoise.config.tau, "noise_relative threshold in units of per-channel noise std");
  scalar(denoise, "--lambda-r", o.lambda_r, "data fidelity weight (default 0.1 / sigma^2, peak-1 units)");
  scalar(denoise, "--iters", o.denoise_iters, "iterations (default ceil(sigma / 10))");
  scalar(denoise, "--clean", o.denoise.clean, "ground-truth PGM; prints PSNR when given");
  scalar(denoise, "--add-noise", o.noise_seed, "treat --input as clean and add noise of --sigma with this seed");
  scalar(denoise, "--noisy-output", o.denoise.noisy_output, "where to save the synthesized noisy image");
  add_config(denoise, o);

  CLI::App* analyze = app.add_subcommand("analyze", "Report frame bounds and perfect-reconstruction certificates");
  scalar(analyze, "--model", o.analyze.model, "model file")->required();
  scalar(analyze, "--grid", o.analyze.grid, "image size N of the DFT grid");
  scalar(analyze, "--report", o.analyze.report, "write the report as key,value CSV");
  scalar(analyze, "--spectrum", o.analyze.spectrum, "write the eigenvalue grid as CSV");
  add_config(analyze, o);

  CLI::App* psnr = app.add_subcommand("psnr", "PSNR of a test image against a reference");
  psnr->add_option("reference", o.psnr.reference, "reference PGM")->required()->check(CLI::ExistingFile);
  psnr->add_option("test", o.psnr.test, "test PGM")->required()->check(CLI::ExistingFile);
  scalar(psnr, "--peak", o.psnr.peak, "peak value (images are scaled to [0, 1])");
  scalar(psnr, "--csv", o.psnr.csv, "append a row to this CSV (header written once)");
  scalar(psnr, "--label", o.psnr.label, "row label for --csv (default test file name)");
  add_config(psnr, o);

  CLI::App* montage = app.add_subcommand("montage", "Tile a model's filters into a PGM");
  scalar(montage, "--model", o.montage.model, "model file")->required();
  scalar(montage, "-o,--output", o.montage.output, "output PGM")->required();
  scalar(montage, "--zoom", o.montage.zoom, "pixel replication factor");
  add_config(montage, o);
}

// Reads key=value lines ('#' comments, blank lines allowed) into "--key=value" flags.
std::vector<std::string> config_flags(const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::vector<std::string> flags;
  std::string line;
  std::size_t number = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config" || sub.get_option_no_throw("--" + key) == nullptr) {
      throw std::invalid_argument(path + ":" + std::to_string(number) + ": unknown key '" + key + "' for " +
                                  sub.get_name());
    }
    flags.push_back("--" + key + "=" + value);
  }
  return flags;
}

int parse_error(CLI::App& app, const CLI::ParseError& e, std::ostream& out, std::ostream& err) {
  app.exit(e, out, err);
  return e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success) ? kSuccess : kUsageError;
}

int dispatch(Options& o, const std::string& name, std::ostream& out, std::ostream& err) {
  if (name == "learn") {
    o.learn.config.init = parse_init_mode(o.init);
    if (o.normalize == "reference") o.learn.normalization = TrainingNormalization::reference;
    else if (o.normalize == "unit") o.learn.normalization = TrainingNormalization::unit;
    else if (o.normalize == "none") o.learn.normalization = TrainingNormalization::none;
    else throw std::invalid_argument("unknown --normalize value '" + o.normalize + "'");
    return cmd_learn(o.learn, out, err);
  }
  if (name == "denoise") {
    o.denoise.config.mode = parse_denoise_mode(o.mode);
    o.denoise.config.nu_schedule = parse_nu_schedule(o.nu_schedule);
    o.denoise.config.nu = o.denoise_nu;
    o.denoise.config.lambda_r = o.lambda_r;
    o.denoise.config.iterations = o.denoise_iters;
    o.denoise.add_noise_seed = o.noise_seed;
    return cmd_denoise(o.denoise, out, err);
  }
  if (name == "analyze") return cmd_analyze(o.analyze, out, err);
  if (name == "psnr") return cmd_psnr(o.psnr, out, err);
  return cmd_montage(o.montage, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto parse = [&](CLI::App& app, std::vector<std::string> argv) {
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  };

  Options first;
  CLI::App app("fbst: filter-bank sparsifying transforms", "fbst");
  build(app, first);
  try {
    parse(app, args);
  } catch (const CLI::ParseError& e) {
    return parse_error(app, e, out, err);
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (first.config_file.empty()) {
    try {
      return dispatch(first, name, out, err);
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return kUsageError;
    }
  }

  // Second pass: config entries go before the command-line flags so that
  // the latter win under the take-last policy.
  std::vector<std::string> merged;
  try {
    merged = config_flags(first.config_file, *sub);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  const auto pos = std::find(args.begin(), args.end(), name);
  merged.insert(merged.begin(), name);
  merged.insert(merged.end(), pos + 1, args.end());

  Options second;
  CLI::App again("fbst: filter-bank sparsifying transforms", "fbst");
  build(again, second);
  try {
    parse(again, merged);
  } catch (const CLI::ParseError& e) {
    return parse_error(again, e, out, err);
  }
  try {
    return dispatch(second, name, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace fbst::cli
