#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "tsimg/alignment.hpp"
#include "tsimg/error.hpp"
#include "tsimg/evaluation.hpp"
#include "tsimg/imaging.hpp"
#include "tsimg/series.hpp"

namespace py = pybind11;
using namespace tsimg;

namespace {

UnivariateSeries to_series(const std::vector<double>& x) { return UnivariateSeries{x}; }

template <typename T, typename Parse>
T parse_or_throw(const std::string& name, Parse parse, const char* what) {
  const auto v = parse(name);
  if (!v) throw py::value_error(std::string("unknown ") + what + ": " + name);
  return *v;
}

std::vector<Matrix> render_py(const Matrix& series, const std::string& method, int uvh_period, int rp_embed_dim,
                              int rp_delay, int stft_window, int stft_hop, int wavelet_scales,
                              int filterbank_filters, int lineplot_height, int lineplot_width) {
  ImagingOptions o;
  o.method = parse_or_throw<ImagingMethod>(method, parse_imaging_method, "imaging method");
  o.uvh_period = uvh_period;
  o.rp_embed_dim = rp_embed_dim;
  o.rp_delay = rp_delay;
  o.stft_window = stft_window;
  o.stft_hop = stft_hop;
  o.wavelet_scales = wavelet_scales;
  o.filterbank_filters = filterbank_filters;
  o.lineplot_height = lineplot_height;
  o.lineplot_width = lineplot_width;
  std::vector<Matrix> out;
  for (GrayImage& img : render(MultivariateSeries(series), o)) out.push_back(std::move(img.pixels));
  return out;
}

py::tuple run_cli_py(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tsimg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time series to image toolkit";
  m.attr("__version__") = TSIMG_VERSION_STRING;

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "gen_periodic",
      [](int period, int length, const std::string& waveform, std::uint64_t seed, double noise_std) {
        const Waveform w = parse_or_throw<Waveform>(waveform, parse_waveform, "waveform");
        return gen_periodic(period, length, w, seed, noise_std).values;
      },
      py::arg("period"), py::arg("length"), py::arg("waveform") = "sine", py::arg("seed") = 0,
      py::arg("noise_std") = 0.0);
  m.def(
      "gen_ar1", [](double phi, int length, std::uint64_t seed) { return gen_ar1(phi, length, seed).values; },
      py::arg("phi"), py::arg("length"), py::arg("seed") = 0);

  m.def(
      "detect_period",
      [](const std::vector<double>& x, int top_k) {
        const PeriodEstimate e = detect_period(to_series(x), top_k);
        py::dict d;
        d["L"] = e.chosen_L;
        d["frequency"] = e.dominant_frequency;
        d["top_periods"] = e.top_periods;
        d["degenerate"] = e.degenerate;
        return d;
      },
      py::arg("x"), py::arg("top_k") = 3);

  m.def("render", &render_py, py::arg("series"), py::arg("method") = "uvh", py::arg("uvh_period") = 0,
        py::arg("rp_embed_dim") = 1, py::arg("rp_delay") = 1, py::arg("stft_window") = 64, py::arg("stft_hop") = 0,
        py::arg("wavelet_scales") = 32, py::arg("filterbank_filters") = 32, py::arg("lineplot_height") = 64,
        py::arg("lineplot_width") = 64,
        "Render each row of a (variates, T) array, or a single image for mvh.");
  m.def("imaging_methods", [] {
    std::vector<std::string> names;
    for (ImagingMethod method : kAllImagingMethods) names.emplace_back(to_string(method));
    return names;
  });

  m.def(
      "uvh", [](const std::vector<double>& x, int L) { return uvh(to_series(x), L).pixels; }, py::arg("x"),
      py::arg("L"));
  m.def(
      "uvh_inverse",
      [](const Matrix& img, int length) { return uvh_inverse(GrayImage(img), length).values; }, py::arg("image"),
      py::arg("length"));
  m.def(
      "gaf",
      [](const std::vector<double>& x) {
        const GafResult g = gaf(to_series(x));
        return py::make_tuple(g.image.pixels, g.context.min, g.context.max);
      },
      py::arg("x"), "Returns (image, min, max).");
  m.def(
      "gaf_diag_inverse",
      [](const Matrix& img, double min, double max) {
        return gaf_diag_inverse(GrayImage(img), GafContext{min, max}).values;
      },
      py::arg("image"), py::arg("min"), py::arg("max"));

  m.def(
      "resize", [](const Matrix& img, int h, int w) { return resize_bilinear(GrayImage(img), h, w).pixels; },
      py::arg("image"), py::arg("height"), py::arg("width"));
  m.def(
      "standardize_image",
      [](const Matrix& img) {
        const StandardizedImage s = standardize_image(GrayImage(img));
        return py::make_tuple(s.image.pixels, s.mean, s.stddev);
      },
      py::arg("image"), "Returns (standardized, mean, std).");
  m.def(
      "align_image",
      [](const Matrix& img, int image_size, int patch_size) {
        return align_image(GrayImage(img), image_size, patch_size).patches.patches;
      },
      py::arg("image"), py::arg("image_size"), py::arg("patch_size"),
      "Resize, standardize, replicate to 3 channels and patchify; one row per patch.");

  m.def("mse", &metric_mse, py::arg("pred"), py::arg("truth"));
  m.def("mae", &metric_mae, py::arg("pred"), py::arg("truth"));
  m.def(
      "accuracy", [](const std::vector<int>& preds, const std::vector<int>& labels) {
        return metric_accuracy(preds, labels);
      },
      py::arg("preds"), py::arg("labels"));
  m.def(
      "perturb",
      [](const Matrix& series, const std::string& kind, std::uint64_t seed) {
        const PerturbKind k = parse_or_throw<PerturbKind>(kind, parse_perturb_kind, "perturbation");
        return perturb(MultivariateSeries(series), PerturbMode{k, seed}).values;
      },
      py::arg("series"), py::arg("kind"), py::arg("seed") = 0);
  m.def(
      "performance_drop",
      [](double base, double perturbed, bool higher_is_better) {
        return performance_drop(base, perturbed, higher_is_better ? Better::Higher : Better::Lower);
      },
      py::arg("base"), py::arg("perturbed"), py::arg("higher_is_better") = false);
  m.def("reoccurrence_n", &reoccurrence_n, py::arg("i"), py::arg("k"));

  m.def("run_cli", &run_cli_py, py::arg("args"),
        "Run a tsimg subcommand in-process; returns (exit_code, stdout, stderr).");
}
