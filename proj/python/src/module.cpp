#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <stdexcept>

#include "dprof/denoise.hpp"
#include "dprof/grid.hpp"
#include "dprof/image_io.hpp"
#include "dprof/metrics.hpp"
#include "dprof/weights.hpp"

namespace py = pybind11;
using namespace dprof;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// 1D arrays become M x 1 signals and come back 1D.
ScalarField to_field(const Array& a, double spacing = 1.0) {
  if (a.ndim() == 1) {
    return ScalarField(a.shape(0), 1, std::vector<double>(a.data(), a.data() + a.size()), spacing);
  }
  if (a.ndim() != 2) throw py::value_error("expected a 1D or 2D array");
  return ScalarField(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()), spacing);
}

Array to_array(const ScalarField& f, bool one_d) {
  const auto rows = static_cast<py::ssize_t>(f.rows());
  const auto cols = static_cast<py::ssize_t>(f.cols());
  Array out = one_d ? Array(std::vector<py::ssize_t>{rows}) : Array(std::vector<py::ssize_t>{rows, cols});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

WeightSpec make_weight(const std::string& family, std::optional<double> a, std::optional<double> b,
                       std::optional<double> height, std::optional<double> cutoff, double radius) {
  WeightSpec spec;
  spec.mollify_radius = radius;
  if (family == "w3") {
    if (a || b) throw py::value_error("a and b apply to w1 and w2 only");
    WeightW3 f;
    if (height) f.height = *height;
    if (cutoff) f.cutoff = *cutoff;
    spec.family = f;
  } else if (family == "w1" || family == "w2") {
    if (height || cutoff) throw py::value_error("height and cutoff apply to w3 only");
    auto fill = [&](auto f) {
      if (a) f.a = *a;
      if (b) f.b = *b;
      return f;
    };
    if (family == "w1") {
      spec.family = fill(WeightW1{});
    } else {
      spec.family = fill(WeightW2{});
    }
  } else {
    throw py::value_error("unknown weight family: " + family);
  }
  spec.validate();
  return spec;
}

MollifyOrder parse_order(const std::string& s) {
  if (s == "mollify-first") return MollifyOrder::kMollifyThenDifferentiate;
  if (s == "gradient-first") return MollifyOrder::kDifferentiateThenMollify;
  throw py::value_error("order must be mollify-first or gradient-first");
}

SolverConfig make_solver(double epsilon, int max_iters, bool accelerated) {
  SolverConfig cfg;
  cfg.stop_tol = epsilon;
  cfg.max_iters = max_iters;
  cfg.accelerated = accelerated;
  cfg.validate();
  return cfg;
}

py::dict metrics_dict(const MetricReport& r) {
  py::dict d;
  d["d_tv"] = r.d_tv;
  d["d_l2"] = r.d_l2;
  d["psnr"] = r.psnr.db;
  d["psnr_infinite"] = r.psnr.infinite;
  d["ssim"] = r.ssim;
  d["d_l2_noisy"] = r.d_l2_noisy;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dprof, m) {
  m.doc() = "Double-phase ROF denoising";

  py::register_exception<ImageIoError>(m, "ImageIoError", PyExc_OSError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);

  m.def(
      "denoise",
      [](const Array& g, const std::string& model, double lambda_, std::optional<double> alpha,
         const std::string& weight_family, std::optional<double> a, std::optional<double> b,
         std::optional<double> height, std::optional<double> cutoff, double radius,
         std::optional<double> pre_lambda, const std::string& order, double epsilon, int max_iters,
         bool accelerated, double spacing) {
        ModelConfig cfg;
        cfg.model = parse_model(model);
        cfg.lambda = lambda_;
        cfg.alpha = alpha;
        cfg.pre_lambda = pre_lambda;
        const bool dp = cfg.model == Model::kDpAdaptive || cfg.model == Model::kDpNoisy;
        if (dp) {
          cfg.weight = make_weight(weight_family, a, b, height, cutoff, radius);
        } else if (a || b || height || cutoff || radius != 0.0) {
          throw py::value_error("weight parameters apply to dp-adaptive and dp-noisy only");
        }
        cfg.order = parse_order(order);
        cfg.solver = make_solver(epsilon, max_iters, accelerated);
        const ScalarField field = to_field(g, spacing);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_model(field, cfg);
        }
        const bool one_d = g.ndim() == 1;
        py::dict out;
        out["u"] = to_array(r.u, one_d);
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["residual"] = r.residual;
        if (r.weight) out["weight"] = to_array(*r.weight, one_d);
        if (r.u_rof) {
          out["u_rof"] = to_array(*r.u_rof, one_d);
          out["pre_iterations"] = r.pre_iterations;
          out["pre_converged"] = r.pre_converged;
        }
        return out;
      },
      py::arg("g"), py::arg("model") = "rof", py::arg("lambda_") = 0.24, py::arg("alpha") = py::none(),
      py::arg("weight_family") = "w1", py::arg("a") = py::none(), py::arg("b") = py::none(),
      py::arg("height") = py::none(), py::arg("cutoff") = py::none(), py::arg("radius") = 0.0,
      py::arg("pre_lambda") = py::none(), py::arg("order") = "mollify-first", py::arg("epsilon") = 1e-4,
      py::arg("max_iters") = 10000, py::arg("accelerated") = true, py::arg("spacing") = 1.0,
      "Denoise g with one model. Returns a dict with u, iterations, converged, residual\n"
      "and, for dp-* models, weight (and u_rof, pre_iterations for dp-adaptive).");

  m.def(
      "weight_function",
      [](const Array& x, const std::string& family, std::optional<double> a, std::optional<double> b,
         std::optional<double> height, std::optional<double> cutoff) {
        const WeightSpec spec = make_weight(family, a, b, height, cutoff, 0.0);
        Array out(x.request().shape);
        for (py::ssize_t k = 0; k < x.size(); ++k) out.mutable_data()[k] = eval_weight_function(spec, x.data()[k]);
        return out;
      },
      py::arg("x"), py::arg("family") = "w1", py::arg("a") = py::none(), py::arg("b") = py::none(),
      py::arg("height") = py::none(), py::arg("cutoff") = py::none());

  m.def(
      "build_weight",
      [](const Array& g, const std::string& pipeline, double lambda_, const std::string& family,
         std::optional<double> a, std::optional<double> b, std::optional<double> height,
         std::optional<double> cutoff, double radius, const std::string& order) {
        const WeightSpec spec = make_weight(family, a, b, height, cutoff, radius);
        const ScalarField field = to_field(g);
        const bool one_d = g.ndim() == 1;
        py::dict out;
        WeightResult w;
        if (pipeline == "adaptive") {
          AdaptiveWeight aw = build_weight_adaptive(field, lambda_, spec, SolverConfig{}, parse_order(order));
          out["u_rof"] = to_array(aw.u_rof, one_d);
          out["rof_iterations"] = aw.rof_iterations;
          out["rof_converged"] = aw.rof_converged;
          w = std::move(aw.weight);
        } else if (pipeline == "noisy") {
          w = build_weight_noisy(field, spec, parse_order(order));
        } else {
          throw py::value_error("pipeline must be adaptive or noisy");
        }
        out["weight"] = to_array(w.weight, one_d);
        out["gradient_magnitude"] = to_array(w.gradient_magnitude, one_d);
        out["max_gradient"] = w.max_gradient;
        return out;
      },
      py::arg("g"), py::arg("pipeline") = "adaptive", py::arg("lambda_") = 0.24, py::arg("family") = "w1",
      py::arg("a") = py::none(), py::arg("b") = py::none(), py::arg("height") = py::none(),
      py::arg("cutoff") = py::none(), py::arg("radius") = 0.0, py::arg("order") = "mollify-first");

  m.def("gradient", [](const Array& u, double spacing) {
    const VectorField p = gradient(to_field(u, spacing));
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(p.rows()), static_cast<py::ssize_t>(p.cols())};
    Array first(shape);
    Array second(shape);
    std::copy(p.first().begin(), p.first().end(), first.mutable_data());
    std::copy(p.second().begin(), p.second().end(), second.mutable_data());
    return py::make_tuple(first, second);
  }, py::arg("u"), py::arg("spacing") = 1.0);

  m.def("divergence", [](const Array& p1, const Array& p2, double spacing) {
    const ScalarField a = to_field(p1);
    const ScalarField b = to_field(p2);
    if (!a.same_shape(b)) throw py::value_error("p1 and p2 differ in shape");
    const VectorField p(a.rows(), a.cols(), std::vector<double>(a.values().begin(), a.values().end()),
                        std::vector<double>(b.values().begin(), b.values().end()), spacing);
    return to_array(divergence(p), p1.ndim() == 1);
  }, py::arg("p1"), py::arg("p2"), py::arg("spacing") = 1.0);

  m.def("total_variation", [](const Array& u) { return total_variation(to_field(u)); }, py::arg("u"));

  m.def("add_noise", [](const Array& u, double sigma, std::uint64_t seed) {
    return to_array(add_gaussian_noise(to_field(u), {sigma, seed}), u.ndim() == 1);
  }, py::arg("u"), py::arg("sigma"), py::arg("seed") = 0);

  m.def("synthetic", [](const std::string& kind, std::size_t size, int jumps, double ramp) {
    const SyntheticKind k = parse_synthetic_kind(kind);
    const ScalarField f = make_synthetic(k, size, {jumps, ramp});
    return to_array(f, k != SyntheticKind::kDoubleGradient);
  }, py::arg("kind"), py::arg("size") = 256, py::arg("jumps") = 6, py::arg("ramp") = 0.15);

  m.def("d_tv", [](const Array& u, const Array& original) { return d_tv_image(to_field(u), to_field(original)); },
        py::arg("u"), py::arg("original"));
  m.def("d_l2", [](const Array& u, const Array& original) { return d_l2_image(to_field(u), to_field(original)); },
        py::arg("u"), py::arg("original"));
  m.def("psnr", [](const Array& u, const Array& original, double peak) {
    return psnr(to_field(u), to_field(original), peak).db;
  }, py::arg("u"), py::arg("original"), py::arg("peak") = 1.0);
  m.def("ssim", [](const Array& a, const Array& b, int window, double gaussian_sigma) {
    SsimParams p;
    p.window = window;
    p.gaussian_sigma = gaussian_sigma;
    return ssim(to_field(a), to_field(b), p);
  }, py::arg("a"), py::arg("b"), py::arg("window") = 11, py::arg("gaussian_sigma") = 1.5);
  m.def("evaluate", [](const Array& u, const Array& original, const Array& noisy) {
    return metrics_dict(evaluate(to_field(u), to_field(original), to_field(noisy)));
  }, py::arg("u"), py::arg("original"), py::arg("noisy"));

  m.def("load_image", [](const std::string& path) { return to_array(load_field(path), false); }, py::arg("path"));
  m.def("save_image", [](const Array& u, const std::string& path) { save_field(to_field(u), path); },
        py::arg("u"), py::arg("path"));

  m.def(
      "sweep",
      [](const Array& original, const std::vector<std::string>& models, const std::vector<double>& lambdas,
         const std::vector<double>& sigmas, std::optional<double> alpha, const std::string& weight_family,
         std::optional<double> a, std::optional<double> b, double radius, std::uint64_t seed) {
        SweepConfig cfg;
        for (const std::string& name : models) {
          ModelConfig mc;
          mc.model = parse_model(name);
          if (mc.model == Model::kHuber) mc.alpha = alpha;
          if (mc.model == Model::kDpAdaptive || mc.model == Model::kDpNoisy) {
            mc.weight = make_weight(weight_family, a, b, std::nullopt, std::nullopt, radius);
          }
          cfg.models.push_back(mc);
        }
        cfg.lambdas = lambdas;
        cfg.sigmas = sigmas;
        cfg.seed = seed;
        const ScalarField field = to_field(original);
        std::ostringstream csv;
        {
          py::gil_scoped_release release;
          run_sweep(field, cfg, &csv);
        }
        return csv.str();
      },
      py::arg("original"), py::arg("models"), py::arg("lambdas"), py::arg("sigmas"), py::arg("alpha") = py::none(),
      py::arg("weight_family") = "w1", py::arg("a") = py::none(), py::arg("b") = py::none(),
      py::arg("radius") = 0.0, py::arg("seed") = 0, "Runs a sweep and returns the CSV text.");
}
