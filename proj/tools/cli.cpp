#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "dprof/denoise.hpp"
#include "dprof/image_io.hpp"
#include "dprof/metrics.hpp"

namespace dprof {

namespace {

using json = nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SourceOptions {
  std::string input;
  std::string synthetic;
  std::size_t size = 512;
  int jumps = 6;
  double ramp = 0.15;
};

struct WeightOptions {
  std::string family = "w1";
  double a = 0.0;
  double b = 0.0;
  double height = 0.0;
  double cutoff = 0.0;
  double radius = 0.0;
  std::string order = "mollify-first";
  std::vector<CLI::Option*> flags;
  CLI::Option* a_opt = nullptr;
  CLI::Option* b_opt = nullptr;
  CLI::Option* height_opt = nullptr;
  CLI::Option* cutoff_opt = nullptr;

  bool given() const {
    for (const CLI::Option* f : flags) {
      if (f->count() > 0) return true;
    }
    return false;
  }
};

struct SolverOptions {
  double epsilon = 1e-4;
  int max_iters = 10000;
  bool standard = false;
  double tau0 = 0.25;
  double sigma0 = 0.25;
  double theta = 1.0;
  std::optional<double> gamma;
  std::string norm_reading = "squared";
};

struct ModelOptions {
  std::string model = "rof";
  double lambda = 0.24;
  std::optional<double> alpha;
  std::optional<double> pre_lambda;
};

void add_source_options(CLI::App* app, SourceOptions& s) {
  app->add_option("--input,-i", s.input, "Input image (.pgm, .png) or matrix (.csv)");
  app->add_option("--synthetic", s.synthetic, "Synthetic datum instead of --input")
      ->check(CLI::IsMember({"saw", "step", "double_gradient"}));
  app->add_option("--size", s.size, "Size of the synthetic datum")->capture_default_str();
  app->add_option("--jumps", s.jumps, "Jumps of the saw signal")->capture_default_str();
  app->add_option("--ramp", s.ramp, "Ramp rise of the saw signal")->capture_default_str();
}

void add_weight_options(CLI::App* app, WeightOptions& w) {
  w.flags.push_back(app->add_option("--weight-family", w.family, "Weight function")
                        ->check(CLI::IsMember({"w1", "w2", "w3"}))
                        ->capture_default_str());
  w.a_opt = app->add_option("--a", w.a, "W1/W2 parameter a");
  w.b_opt = app->add_option("--b", w.b, "W1/W2 parameter b");
  w.height_opt = app->add_option("--height", w.height, "W3 height");
  w.cutoff_opt = app->add_option("--cutoff", w.cutoff, "W3 support radius R");
  w.flags.insert(w.flags.end(), {w.a_opt, w.b_opt, w.height_opt, w.cutoff_opt});
  w.flags.push_back(app->add_option("--radius,-r", w.radius, "Mollification radius in pixels")
                        ->capture_default_str());
  w.flags.push_back(app->add_option("--order", w.order, "Mollify before or after differentiating")
                        ->check(CLI::IsMember({"mollify-first", "gradient-first"}))
                        ->capture_default_str());
}

void add_solver_options(CLI::App* app, SolverOptions& s) {
  app->add_option("--epsilon", s.epsilon, "Relative primal change stopping tolerance")
      ->capture_default_str();
  app->add_option("--max-iters", s.max_iters, "Iteration cap per solve")->capture_default_str();
  app->add_flag("--standard", s.standard, "Constant step sizes instead of the accelerated variant");
  app->add_option("--tau0", s.tau0, "Initial primal step")->capture_default_str();
  app->add_option("--sigma0", s.sigma0, "Initial dual step")->capture_default_str();
  app->add_option("--theta", s.theta, "Extrapolation weight of the standard variant")
      ->capture_default_str();
  app->add_option("--gamma", s.gamma, "Acceleration constant (default 1/lambda)");
  app->add_option("--norm-reading", s.norm_reading, "Read 8/h^2 as a bound on ||K||^2 or ||K||")
      ->check(CLI::IsMember({"squared", "norm"}))
      ->capture_default_str();
}

void add_model_options(CLI::App* app, ModelOptions& m) {
  app->add_option("--model,-m", m.model, "rof, huber, dp-adaptive or dp-noisy")
      ->check(CLI::IsMember({"rof", "huber", "dp-adaptive", "dp-noisy"}))
      ->capture_default_str();
  app->add_option("--lambda,-l", m.lambda, "Fidelity parameter")->capture_default_str();
  app->add_option("--alpha", m.alpha, "Huber parameter (alias: a_h)");
  app->add_option("--pre-lambda", m.pre_lambda, "Lambda of the ROF pre-solve (dp-adaptive)");
}

ScalarField load_source(const SourceOptions& s) {
  if (s.input.empty() == s.synthetic.empty()) {
    throw ConfigError("exactly one of --input and --synthetic is required");
  }
  if (!s.input.empty()) return load_field(s.input);
  SyntheticOptions opts;
  opts.jumps = s.jumps;
  opts.ramp = s.ramp;
  return make_synthetic(parse_synthetic_kind(s.synthetic), s.size, opts);
}

WeightSpec build_weight_spec(const WeightOptions& w) {
  WeightSpec spec;
  spec.mollify_radius = w.radius;
  if (w.family == "w3") {
    if (w.a_opt->count() > 0 || w.b_opt->count() > 0) {
      throw ConfigError("--a and --b apply to w1 and w2 only");
    }
    WeightW3 f;
    if (w.height_opt->count() > 0) f.height = w.height;
    if (w.cutoff_opt->count() > 0) f.cutoff = w.cutoff;
    spec.family = f;
  } else {
    if (w.height_opt->count() > 0 || w.cutoff_opt->count() > 0) {
      throw ConfigError("--height and --cutoff apply to w3 only");
    }
    auto fill = [&](auto f) {
      if (w.a_opt->count() > 0) f.a = w.a;
      if (w.b_opt->count() > 0) f.b = w.b;
      return f;
    };
    if (w.family == "w1") {
      spec.family = fill(WeightW1{});
    } else {
      spec.family = fill(WeightW2{});
    }
  }
  spec.validate();
  return spec;
}

MollifyOrder parse_order(const std::string& s) {
  return s == "gradient-first" ? MollifyOrder::kDifferentiateThenMollify
                               : MollifyOrder::kMollifyThenDifferentiate;
}

SolverConfig build_solver_config(const SolverOptions& s) {
  SolverConfig cfg;
  cfg.stop_tol = s.epsilon;
  cfg.max_iters = s.max_iters;
  cfg.accelerated = !s.standard;
  cfg.tau0 = s.tau0;
  cfg.sigma0 = s.sigma0;
  cfg.theta = s.theta;
  cfg.gamma = s.gamma;
  cfg.norm_reading = s.norm_reading == "norm" ? NormBoundReading::kNorm : NormBoundReading::kSquaredNorm;
  return cfg;
}

ModelConfig build_model_config(Model model, const ModelOptions& m, const WeightOptions& w,
                               const SolverOptions& s) {
  ModelConfig cfg;
  cfg.model = model;
  cfg.lambda = m.lambda;
  if (model == Model::kHuber) cfg.alpha = m.alpha;
  const bool double_phase = model == Model::kDpAdaptive || model == Model::kDpNoisy;
  if (double_phase) cfg.weight = build_weight_spec(w);
  if (model == Model::kDpAdaptive) cfg.pre_lambda = m.pre_lambda;
  cfg.order = parse_order(w.order);
  cfg.solver = build_solver_config(s);
  return cfg;
}

// Flags that belong to a model absent from the run are configuration errors.
void check_presence(const std::vector<Model>& models, const ModelOptions& m, const WeightOptions& w) {
  auto has = [&](auto pred) { return std::any_of(models.begin(), models.end(), pred); };
  if (m.alpha && !has([](Model x) { return x == Model::kHuber; })) {
    throw ConfigError("--alpha applies to model huber only");
  }
  if (!m.alpha && has([](Model x) { return x == Model::kHuber; })) {
    throw ConfigError("model huber requires --alpha");
  }
  if (w.given() && !has([](Model x) { return x == Model::kDpAdaptive || x == Model::kDpNoisy; })) {
    throw ConfigError("weight options apply to dp-adaptive and dp-noisy only");
  }
  if (m.pre_lambda && !has([](Model x) { return x == Model::kDpAdaptive; })) {
    throw ConfigError("--pre-lambda applies to dp-adaptive only");
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const MetricReport& r, bool with_noisy) {
  json j = {{"d_tv", r.d_tv},
            {"d_l2", r.d_l2},
            {"psnr", number_or_null(r.psnr.db)},
            {"psnr_infinite", r.psnr.infinite},
            {"ssim", r.ssim}};
  if (with_noisy) j["d_l2_noisy"] = r.d_l2_noisy;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ImageIoError(ImageIoError::Kind::kWriteFailed, "cannot write " + path);
  f << text;
  if (!f) throw ImageIoError(ImageIoError::Kind::kWriteFailed, "cannot write " + path);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

struct Cli {
  CLI::App app{"Double-phase ROF denoising", "dprof"};

  SourceOptions source;
  ModelOptions model;
  // One per subcommand: the option pointers inside are per-App.
  WeightOptions denoise_weight;
  WeightOptions sweep_weight;
  WeightOptions weight;
  SolverOptions solver;
  bool allow_nonconvergence = false;

  // denoise
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string original;
  std::string output;
  std::string weight_output;

  // sweep
  std::vector<std::string> models;
  std::vector<double> lambdas;
  std::vector<double> sigmas;
  std::string csv;

  // weight
  std::string pipeline = "adaptive";
  std::string gradient_output;
  std::string curve_output;
  int samples = 256;

  // metrics
  std::string noisy;

  // synth
  std::string kind = "saw";

  CLI::App* denoise = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* weight_cmd = nullptr;
  CLI::App* metrics = nullptr;
  CLI::App* synth = nullptr;
  std::string config_path;

  void add_config_option(CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value file; command-line flags take precedence");
  }

  Cli() {
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    denoise = app.add_subcommand("denoise", "Denoise one datum with one model");
    add_config_option(denoise);
    add_source_options(denoise, source);
    add_model_options(denoise, model);
    add_weight_options(denoise, denoise_weight);
    add_solver_options(denoise, solver);
    denoise->add_option("--sigma", noise_sigma, "Add Gaussian noise of this deviation first")
        ->capture_default_str();
    denoise->add_option("--seed", seed, "Noise seed")->capture_default_str();
    denoise->add_option("--original", original, "Reference image for metrics");
    denoise->add_option("--output,-o", output, "Denoised image or .csv matrix");
    denoise->add_option("--weight-output", weight_output, "Weight field (dp-* models)");
    denoise->add_flag("--allow-nonconvergence", allow_nonconvergence,
                      "Exit 0 even when a solve hits --max-iters");

    sweep = app.add_subcommand("sweep", "Metrics over the product of models, lambdas and noise levels");
    add_config_option(sweep);
    add_source_options(sweep, source);
    sweep->add_option("--models", models, "Comma-separated models")
        ->delimiter(',')
        ->check(CLI::IsMember({"rof", "huber", "dp-adaptive", "dp-noisy"}));
    sweep->add_option("--lambdas", lambdas, "Comma-separated lambdas")->delimiter(',');
    sweep->add_option("--sigmas", sigmas, "Comma-separated noise deviations")->delimiter(',');
    sweep->add_option("--alpha", model.alpha, "Huber parameter (alias: a_h)");
    sweep->add_option("--pre-lambda", model.pre_lambda, "Lambda of the ROF pre-solve (dp-adaptive)");
    add_weight_options(sweep, sweep_weight);
    add_solver_options(sweep, solver);
    sweep->add_option("--seed", seed, "Base noise seed")->capture_default_str();
    sweep->add_option("--csv", csv, "CSV destination (stdout when omitted)");
    sweep->add_flag("--allow-nonconvergence", allow_nonconvergence,
                    "Exit 0 even when a cell hits --max-iters");

    weight_cmd = app.add_subcommand("weight", "Build a double-phase weight and its plot data");
    add_config_option(weight_cmd);
    add_source_options(weight_cmd, source);
    add_weight_options(weight_cmd, weight);
    add_solver_options(weight_cmd, solver);
    weight_cmd->add_option("--pipeline", pipeline, "adaptive (ROF pre-solve) or noisy")
        ->check(CLI::IsMember({"adaptive", "noisy"}))
        ->capture_default_str();
    weight_cmd->add_option("--lambda,-l", model.lambda, "Lambda of the ROF pre-solve")
        ->capture_default_str();
    weight_cmd->add_option("--gradient-output", gradient_output, "Gradient magnitude field");
    weight_cmd->add_option("--curve-output", curve_output, "CSV of W sampled on [0, max gradient]");
    weight_cmd->add_option("--weight-output,-o", weight_output, "Weight field");
    weight_cmd->add_option("--samples", samples, "Samples of the W curve")
        ->check(CLI::Range(2, 1000000))
        ->capture_default_str();
    weight_cmd->add_flag("--allow-nonconvergence", allow_nonconvergence,
                         "Exit 0 even when the pre-solve hits --max-iters");

    metrics = app.add_subcommand("metrics", "Compare a result against an original");
    metrics->add_option("--input,-i", source.input, "Result")->required();
    metrics->add_option("--original", original, "Original")->required();
    metrics->add_option("--noisy", noisy, "Noisy datum, for d_l2_noisy");

    synth = app.add_subcommand("synth", "Write a synthetic datum");
    synth->add_option("--kind", kind, "saw, step or double_gradient")
        ->check(CLI::IsMember({"saw", "step", "double_gradient"}))
        ->capture_default_str();
    synth->add_option("--size", source.size, "Signal length or image side")->capture_default_str();
    synth->add_option("--jumps", source.jumps, "Jumps of the saw signal")->capture_default_str();
    synth->add_option("--ramp", source.ramp, "Ramp rise of the saw signal")->capture_default_str();
    synth->add_option("--output,-o", output, "Destination (.pgm, .png or .csv)")->required();
  }

  int run_denoise(std::ostream& out) {
    const Model m = parse_model(model.model);
    check_presence({m}, model, denoise_weight);
    const ModelConfig cfg = build_model_config(m, model, denoise_weight, solver);
    cfg.validate();

    ScalarField g = load_source(source);
    std::optional<ScalarField> reference;
    if (!original.empty()) reference = load_field(original);
    if (noise_sigma > 0.0) {
      if (!reference) reference = g;
      g = add_gaussian_noise(g, {noise_sigma, seed});
    } else if (noise_sigma < 0.0) {
      throw ConfigError("--sigma must be nonnegative");
    }

    const RunResult run = run_model(g, cfg);
    if (!output.empty()) save_field(run.u, output);
    if (!weight_output.empty()) {
      if (!run.weight) throw ConfigError("--weight-output requires a dp-* model");
      save_field(*run.weight, weight_output);
    }

    json report = {{"command", "denoise"},
                   {"model", to_string(m)},
                   {"lambda", cfg.lambda},
                   {"iterations", run.iterations},
                   {"converged", run.converged},
                   {"residual", run.residual}};
    if (m == Model::kDpAdaptive) {
      report["pre_iterations"] = run.pre_iterations;
      report["pre_converged"] = run.pre_converged;
    }
    if (reference) {
      if (!reference->same_shape(g)) throw ConfigError("--original and input shapes differ");
      report["metrics"] = metrics_json(evaluate(run.u, *reference, g), true);
    }
    out << report.dump() << '\n';
    return run.all_converged() || allow_nonconvergence ? kExitOk : kExitNotConverged;
  }

  int run_sweep_cmd(std::ostream& out) {
    if (models.empty() || lambdas.empty() || sigmas.empty()) {
      throw ConfigError("sweep requires nonempty --models, --lambdas and --sigmas");
    }
    std::vector<Model> parsed;
    for (const std::string& name : models) parsed.push_back(parse_model(name));
    check_presence(parsed, model, sweep_weight);

    SweepConfig cfg;
    for (Model m : parsed) cfg.models.push_back(build_model_config(m, model, sweep_weight, solver));
    cfg.lambdas = lambdas;
    cfg.sigmas = sigmas;
    cfg.seed = seed;
    const ScalarField original_field = load_source(source);

    std::vector<SweepRow> rows;
    if (csv.empty()) {
      rows = run_sweep(original_field, cfg, &out);
    } else {
      std::ofstream f(csv, std::ios::binary);
      if (!f) throw ImageIoError(ImageIoError::Kind::kWriteFailed, "cannot write " + csv);
      rows = run_sweep(original_field, cfg, &f);
      for (const SweepExtremum& e : sweep_extrema(rows)) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s sigma=%-10.4g %-5s best at lambda=%-8.4g %.6g\n",
                      to_string(e.model), e.sigma, e.metric.c_str(), e.lambda, e.value);
        out << line;
      }
    }
    const bool all = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
    return all || allow_nonconvergence ? kExitOk : kExitNotConverged;
  }

  int run_weight(std::ostream& out) {
    const WeightSpec spec = build_weight_spec(weight);
    const MollifyOrder order = parse_order(weight.order);
    const ScalarField g = load_source(source);

    WeightResult built;
    json report = {{"command", "weight"}, {"pipeline", pipeline}};
    bool converged = true;
    if (pipeline == "adaptive") {
      const SolverConfig cfg = build_solver_config(solver);
      AdaptiveWeight a = build_weight_adaptive(g, model.lambda, spec, cfg, order);
      report["rof_iterations"] = a.rof_iterations;
      report["rof_converged"] = a.rof_converged;
      converged = a.rof_converged;
      built = std::move(a.weight);
    } else {
      built = build_weight_noisy(g, spec, order);
    }

    if (!gradient_output.empty()) save_field(built.gradient_magnitude, gradient_output);
    if (!weight_output.empty()) save_field(built.weight, weight_output);
    if (!curve_output.empty()) {
      const double top = built.max_gradient > 0.0 ? built.max_gradient : spec.cutoff();
      std::string text = "x,w\n";
      for (int k = 0; k < samples; ++k) {
        const double x = top * k / (samples - 1);
        text += format_number(x) + ',' + format_number(eval_weight_function(spec, x)) + '\n';
      }
      write_text(curve_output, text);
    }

    std::size_t support = 0;
    for (double v : built.weight.values()) support += v > 0.0 ? 1 : 0;
    report["max_gradient"] = built.max_gradient;
    report["support_fraction"] = static_cast<double>(support) / static_cast<double>(built.weight.size());
    report["peak"] = spec.peak();
    report["cutoff"] = spec.cutoff();
    out << report.dump() << '\n';
    return converged || allow_nonconvergence ? kExitOk : kExitNotConverged;
  }

  int run_metrics(std::ostream& out) {
    const ScalarField result = load_field(source.input);
    const ScalarField ref = load_field(original);
    if (!result.same_shape(ref)) throw ConfigError("--input and --original shapes differ");
    const bool with_noisy = !noisy.empty();
    const ScalarField noisy_field = with_noisy ? load_field(noisy) : ref;
    if (!noisy_field.same_shape(ref)) throw ConfigError("--noisy and --original shapes differ");
    json report = {{"command", "metrics"}};
    report["metrics"] = metrics_json(evaluate(result, ref, noisy_field), with_noisy);
    out << report.dump() << '\n';
    return kExitOk;
  }

  int run_synth(std::ostream& out) {
    SyntheticOptions opts;
    opts.jumps = source.jumps;
    opts.ramp = source.ramp;
    const ScalarField field = make_synthetic(parse_synthetic_kind(kind), source.size, opts);
    save_field(field, output);
    out << json{{"command", "synth"}, {"kind", kind}, {"rows", field.rows()}, {"cols", field.cols()}}.dump()
        << '\n';
    return kExitOk;
  }

  // Fills options absent from the command line with values from the flat config file.
  void apply_config(CLI::App* sub) {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw ImageIoError(ImageIoError::Kind::kNotFound, "cannot open " + config_path);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const std::string trimmed = CLI::detail::trim_copy(line);
      if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(config_path + ":" + std::to_string(number) + ": expected key = value");
      }
      const std::string key = CLI::detail::trim_copy(trimmed.substr(0, eq));
      std::string value = CLI::detail::trim_copy(trimmed.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      if (key == "config") throw ConfigError(config_path + ": nested config files are not supported");
      CLI::Option* opt = sub->get_option_no_throw("--" + key);
      if (opt == nullptr) throw ConfigError(config_path + ": unknown key '" + key + "'");
      if (opt->count() > 0) continue;
      const bool vector = opt->get_expected_max() > 1;
      if (vector) {
        for (const std::string& item : CLI::detail::split(value, ',')) opt->add_result(item);
      } else {
        opt->add_result(value);
      }
      opt->run_callback();
    }
  }

  int dispatch(std::ostream& out) {
    for (CLI::App* sub : {denoise, sweep, weight_cmd}) {
      if (sub->parsed()) apply_config(sub);
    }
    if (denoise->parsed()) return run_denoise(out);
    if (sweep->parsed()) return run_sweep_cmd(out);
    if (weight_cmd->parsed()) return run_weight(out);
    if (metrics->parsed()) return run_metrics(out);
    return run_synth(out);
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto cli = std::make_unique<Cli>();
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli->app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << cli->app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << cli->app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what());
    return kExitConfig;
  }

  try {
    return cli->dispatch(out);
  } catch (const ImageIoError& e) {
    write_error(err, std::string("io.") + to_string(e.kind()), e.what());
    return kExitIo;
  } catch (const CLI::Error& e) {
    write_error(err, "config", e.what());
    return kExitConfig;
  } catch (const MetricError& e) {
    write_error(err, "metric", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    write_error(err, "config", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what());
    return kExitConfig;
  }
}

}  // namespace dprof
