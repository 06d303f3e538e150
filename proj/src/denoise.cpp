#include "dprof/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <type_traits>
#include <variant>

namespace dprof {

Model parse_model(const std::string& name) {
  if (name == "rof") return Model::kRof;
  if (name == "huber") return Model::kHuber;
  if (name == "dp-adaptive") return Model::kDpAdaptive;
  if (name == "dp-noisy") return Model::kDpNoisy;
  throw std::invalid_argument("unknown model '" + name + "'");
}

const char* to_string(Model model) {
  switch (model) {
    case Model::kRof:
      return "rof";
    case Model::kHuber:
      return "huber";
    case Model::kDpAdaptive:
      return "dp-adaptive";
    case Model::kDpNoisy:
      return "dp-noisy";
  }
  return "unknown";
}

void ModelConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  const bool huber = model == Model::kHuber;
  const bool double_phase = model == Model::kDpAdaptive || model == Model::kDpNoisy;
  if (huber && !alpha) throw std::invalid_argument("model huber requires alpha");
  if (!huber && alpha) throw std::invalid_argument("alpha applies to model huber only");
  if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (double_phase && !weight) throw std::invalid_argument("double-phase models require a weight spec");
  if (!double_phase && weight) throw std::invalid_argument("weight spec applies to dp-* models only");
  if (weight) weight->validate();
  if (pre_lambda && model != Model::kDpAdaptive) {
    throw std::invalid_argument("pre-solve lambda applies to dp-adaptive only");
  }
  if (pre_lambda && !(*pre_lambda > 0.0)) throw std::invalid_argument("pre-solve lambda must be positive");
  solver.validate();
}

RunResult run_model(const ScalarField& g, const ModelConfig& cfg) {
  cfg.validate();
  RunResult out;
  Regularizer reg = TotalVariation{};
  switch (cfg.model) {
    case Model::kRof:
      break;
    case Model::kHuber:
      reg = Huber{*cfg.alpha};
      break;
    case Model::kDpAdaptive: {
      AdaptiveWeight built = build_weight_adaptive(g, cfg.pre_lambda.value_or(cfg.lambda),
                                                   *cfg.weight, cfg.solver, cfg.order);
      out.pre_iterations = built.rof_iterations;
      out.pre_converged = built.rof_converged;
      out.u_rof = std::move(built.u_rof);
      out.weight = built.weight.weight;
      reg = DoublePhase{std::move(built.weight.weight)};
      break;
    }
    case Model::kDpNoisy: {
      WeightResult built = build_weight_noisy(g, *cfg.weight, cfg.order);
      out.weight = built.weight;
      reg = DoublePhase{std::move(built.weight)};
      break;
    }
  }
  SolveResult solved = solve(FidelityParams{cfg.lambda, g}, reg, cfg.solver);
  out.iterations = solved.iterations;
  out.converged = solved.converged;
  out.residual = solved.final_residual();
  out.u = std::move(solved.u);
  return out;
}

std::uint64_t derive_noise_seed(std::uint64_t base_seed, std::size_t sigma_index) {
  // splitmix64 finalizer over (base, index).
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(sigma_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string sweep_csv_header() {
  return "model,lambda,sigma,alpha,a,b,r,d_l2_noisy,d_tv,d_l2,psnr,ssim,iterations,pre_iterations,"
         "converged";
}

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : ""; }

// W3 reports its height and cutoff in the a and b columns.
std::tuple<std::string, std::string, std::string> weight_columns(const std::optional<WeightSpec>& spec) {
  if (!spec) return {"", "", ""};
  return std::visit(
      [&](const auto& w) -> std::tuple<std::string, std::string, std::string> {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, WeightW3>) {
          return {number(w.height), number(w.cutoff), number(spec->mollify_radius)};
        } else {
          return {number(w.a), number(w.b), number(spec->mollify_radius)};
        }
      },
      spec->family);
}

}  // namespace

std::string to_csv(const SweepRow& row) {
  const auto [a, b, r] = weight_columns(row.weight);
  std::string line = to_string(row.model);
  for (const std::string& cell :
       {number(row.lambda), number(row.sigma), optional_number(row.alpha), a, b, r,
        number(row.metrics.d_l2_noisy), number(row.metrics.d_tv), number(row.metrics.d_l2),
        number(row.metrics.psnr.db), number(row.metrics.ssim), std::to_string(row.iterations),
        std::to_string(row.pre_iterations), std::string(row.converged ? "1" : "0")}) {
    line += ',';
    line += cell;
  }
  return line;
}

std::vector<SweepRow> run_sweep(const ScalarField& original, const SweepConfig& cfg, std::ostream* csv) {
  if (cfg.models.empty() || cfg.lambdas.empty() || cfg.sigmas.empty()) {
    throw std::invalid_argument("sweep ranges must be nonempty");
  }
  for (double s : cfg.sigmas) {
    if (!(s >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  }
  for (ModelConfig model : cfg.models) {
    for (double lambda : cfg.lambdas) {
      model.lambda = lambda;
      model.validate();
    }
  }

  if (csv != nullptr) *csv << sweep_csv_header() << '\n' << std::flush;
  std::vector<SweepRow> rows;
  for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
    const double sigma = cfg.sigmas[si];
    const ScalarField noisy = add_gaussian_noise(original, {sigma, derive_noise_seed(cfg.seed, si)});
    for (const ModelConfig& base : cfg.models) {
      for (double lambda : cfg.lambdas) {
        ModelConfig model = base;
        model.lambda = lambda;
        const RunResult run = run_model(noisy, model);
        SweepRow row;
        row.model = model.model;
        row.lambda = lambda;
        row.sigma = sigma;
        row.alpha = model.alpha;
        row.weight = model.weight;
        row.metrics = evaluate(run.u, original, noisy, cfg.ssim);
        row.iterations = run.iterations;
        row.pre_iterations = run.pre_iterations;
        row.converged = run.all_converged();
        if (csv != nullptr) *csv << (to_csv(row) + '\n') << std::flush;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<SweepExtremum> sweep_extrema(const std::vector<SweepRow>& rows) {
  struct Metric {
    const char* name;
    bool maximize;
    double (*get)(const SweepRow&);
  };
  static const Metric kMetrics[] = {
      {"d_tv", false, [](const SweepRow& r) { return r.metrics.d_tv; }},
      {"d_l2", false, [](const SweepRow& r) { return r.metrics.d_l2; }},
      {"psnr", true, [](const SweepRow& r) { return r.metrics.psnr.db; }},
      {"ssim", true, [](const SweepRow& r) { return r.metrics.ssim; }},
  };

  // Group keys keep first-appearance order so output follows the sweep order.
  std::vector<std::pair<double, Model>> groups;
  for (const SweepRow& r : rows) {
    const std::pair<double, Model> key{r.sigma, r.model};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }

  std::vector<SweepExtremum> out;
  for (const auto& [sigma, model] : groups) {
    for (const Metric& m : kMetrics) {
      const SweepRow* best = nullptr;
      for (const SweepRow& r : rows) {
        if (r.sigma != sigma || r.model != model) continue;
        if (best == nullptr || (m.maximize ? m.get(r) > m.get(*best) : m.get(r) < m.get(*best))) {
          best = &r;
        }
      }
      out.push_back({model, sigma, m.name, best->lambda, m.get(*best)});
    }
  }
  return out;
}

}  // namespace dprof
