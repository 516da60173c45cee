#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fbst/denoise.hpp"
#include "fbst/errors.hpp"
#include "fbst/filter_bank.hpp"
#include "fbst/init.hpp"
#include "fbst/learn.hpp"
#include "fbst/model_io.hpp"
#include "fbst/noise.hpp"
#include "fbst/pgm.hpp"
#include "fbst/sparse_coding.hpp"
#include "fbst/spectrum.hpp"

namespace py = pybind11;
using namespace fbst;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array2& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  return Image(h, w, std::vector<double>(a.data(), a.data() + h * w));
}

Array2 to_array(const Image& img) {
  Array2 out({img.height(), img.width()});
  std::copy(img.samples().begin(), img.samples().end(), out.mutable_data());
  return out;
}

Array2 stack_to_array(const CoefficientStack& stack) {
  const std::size_t n = stack.num_channels();
  const std::size_t h = n ? stack.height() : 0;
  const std::size_t w = n ? stack.width() : 0;
  Array2 out({n, h, w});
  double* dst = out.mutable_data();
  for (const auto& ch : stack.channels) dst = std::copy(ch.samples().begin(), ch.samples().end(), dst);
  return out;
}

CoefficientStack array_to_stack(const Array2& a) {
  if (a.ndim() != 3) throw ShapeError("expected a 3-D array (channels, height, width)");
  const auto h = static_cast<std::size_t>(a.shape(1));
  const auto w = static_cast<std::size_t>(a.shape(2));
  CoefficientStack out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const double* src = a.data() + static_cast<std::size_t>(i) * h * w;
    out.channels.emplace_back(h, w, std::vector<double>(src, src + h * w));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_fbst, m) {
  m.doc() = "Filter-bank sparsifying transforms";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<SingularOperatorError>(m, "SingularOperatorError", PyExc_ArithmeticError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ArithmeticError);
  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_ValueError);

  py::class_<FilterBankTransform>(m, "FilterBankTransform")
      .def(py::init<Eigen::MatrixXd, std::size_t>(), py::arg("weights"), py::arg("fft_size") = 0)
      .def_property_readonly("weights", &FilterBankTransform::weights)
      .def_property_readonly("num_channels", &FilterBankTransform::num_channels)
      .def_property_readonly("filter_size", &FilterBankTransform::filter_size)
      .def_property_readonly("fft_size", &FilterBankTransform::fft_size)
      .def("impulse_response", [](const FilterBankTransform& t, std::size_t i) { return to_array(t.impulse_response(i)); })
      .def("analyze", [](const FilterBankTransform& t, const Array2& x) { return stack_to_array(analyze(t, to_image(x))); })
      .def("adjoint", [](const FilterBankTransform& t, const Array2& y) { return to_array(adjoint(t, array_to_stack(y))); })
      .def(
          "pseudoinverse",
          [](const FilterBankTransform& t, const Array2& y, double lambda_r) {
            return to_array(pseudoinverse_apply(t, array_to_stack(y), lambda_r));
          },
          py::arg("coefficients"), py::arg("lambda_r") = 0.0);

  m.def("dct_basis", &dct_basis, py::arg("filter_size"));
  m.def(
      "init_transform",
      [](std::size_t k, std::size_t nc, const std::string& mode, std::uint64_t seed, std::size_t fft_size) {
        return init_transform(k, nc, parse_init_mode(mode), seed, fft_size);
      },
      py::arg("filter_size"), py::arg("num_channels"), py::arg("mode") = "random_gaussian", py::arg("seed") = 0,
      py::arg("fft_size") = 0);

  m.def(
      "gram_eigenvalues",
      [](const FilterBankTransform& t, std::size_t grid, bool orthonormal) {
        return Eigen::ArrayXXd(
            gram_eigenvalues(t, grid, orthonormal ? DftNormalization::orthonormal : DftNormalization::unnormalized));
      },
      py::arg("transform"), py::arg("grid"), py::arg("orthonormal") = false);
  m.def("linear_pr_threshold", &linear_pr_threshold, py::arg("grid"), py::arg("filter_size"));
  m.def(
      "spectrum_report",
      [](const FilterBankTransform& t, std::size_t grid) {
        const SpectrumReport r = spectrum_report(t, grid);
        py::dict d;
        d["grid_size"] = r.grid_size;
        d["lambda_min"] = r.lambda_min;
        d["lambda_max"] = r.lambda_max;
        d["condition_number"] = r.condition_number;
        d["argmin"] = py::make_tuple(r.argmin_row, r.argmin_col);
        d["linear_pr_threshold"] = r.linear_pr_threshold;
        d["cyclic_pr"] = r.cyclic_pr;
        d["linear_pr_certified"] = r.linear_pr_certified;
        return d;
      },
      py::arg("transform"), py::arg("grid"));

  m.def(
      "hard_threshold",
      [](const std::vector<double>& v, double nu) { return hard_threshold(v, nu); }, py::arg("values"),
      py::arg("nu"));

  m.def(
      "learn",
      [](const std::vector<Array2>& images, std::size_t num_channels, std::size_t filter_size,
         std::size_t iterations, double mu, double lambda, double nu, const std::string& init, std::uint64_t seed,
         bool normalize) {
        std::vector<Image> data;
        for (const auto& a : images) data.push_back(normalize ? normalize_for_training(to_image(a)) : to_image(a));
        LearnConfig c;
        c.num_channels = num_channels;
        c.filter_size = filter_size;
        c.outer_iterations = iterations;
        c.mu = mu;
        c.lambda = lambda;
        c.nu = nu;
        c.init = parse_init_mode(init);
        c.seed = seed;
        const LearnResult r = [&] {
          py::gil_scoped_release release;
          return learn(TrainingSet::from_images(std::move(data)), c);
        }();
        std::vector<double> trace;
        for (const auto& e : r.trace) trace.push_back(e.objective.total);
        return py::make_tuple(r.transform, trace);
      },
      py::arg("images"), py::arg("num_channels") = 64, py::arg("filter_size") = 8, py::arg("iterations") = 100,
      py::arg("mu") = 3.0, py::arg("lambda_") = 7e-4, py::arg("nu") = 5.5e-3, py::arg("init") = "random_gaussian",
      py::arg("seed") = 0, py::arg("normalize") = true);

  m.def(
      "denoise",
      [](const FilterBankTransform& t, const Array2& noisy, double sigma, const std::string& mode,
         std::optional<double> nu, std::optional<double> lambda_r, std::optional<std::size_t> iterations) {
        DenoiseConfig c;
        c.mode = parse_denoise_mode(mode);
        c.sigma_hint = sigma;
        c.nu = nu;
        c.lambda_r = lambda_r;
        c.iterations = iterations;
        return to_array(denoise(t, to_image(noisy), c));
      },
      py::arg("transform"), py::arg("noisy"), py::arg("sigma"), py::arg("mode") = "iterative",
      py::arg("nu") = py::none(), py::arg("lambda_r") = py::none(), py::arg("iterations") = py::none());

  m.def(
      "add_gaussian_noise",
      [](const Array2& x, double sigma, std::uint64_t seed) { return to_array(add_gaussian_noise(to_image(x), sigma, seed)); },
      py::arg("image"), py::arg("sigma"), py::arg("seed"));
  m.def(
      "psnr", [](const Array2& test, const Array2& reference, double peak) { return psnr(to_image(test), to_image(reference), peak); },
      py::arg("test"), py::arg("reference"), py::arg("peak") = 1.0);

  m.def("load_model", &load_model, py::arg("path"));
  m.def("save_model", &save_model, py::arg("transform"), py::arg("path"));
  m.def("load_pgm", [](const std::filesystem::path& p) { return to_array(load_pgm(p)); }, py::arg("path"));
  m.def("save_pgm", [](const Array2& x, const std::filesystem::path& p) { save_pgm(to_image(x), p); }, py::arg("image"),
        py::arg("path"));
}
