// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Pass a criterion number to run only that one.

#include <algorithm>
#include <array>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cli.hpp"
#include "dprof/denoise.hpp"
#include "dprof/grid.hpp"
#include "dprof/image_io.hpp"
#include "dprof/metrics.hpp"
#include "dprof/prox.hpp"
#include "dprof/solver.hpp"
#include "dprof/weights.hpp"
#include "oracles.hpp"

using namespace dprof;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---- 1: operators

Outcome operators() {
  constexpr double kAdjointTol = 1e-10;
  Outcome o;
  double worst = 0.0;
  std::uint64_t seed = 1;
  const std::vector<std::pair<std::size_t, std::size_t>> shapes{{64, 1}, {16, 16}, {64, 64}};
  for (auto [m, n] : shapes) {
    for (int k = 0; k < 100; ++k) {
      const ScalarField u = oracle::random_field(m, n, seed++, -1.0, 1.0);
      const VectorField p = oracle::random_vector_field(m, n, seed++, 1.0);
      const double lhs = std::abs(inner_product(gradient(u), p) + inner_product(u, divergence(p)));
      worst = std::max(worst, lhs / (norm(u) * norm(p) + 1.0));
    }
  }
  o.pass = worst <= kAdjointTol;
  double worst_ratio = 0.0;
  for (auto [m, n] : shapes) {
    for (double h : {1.0, 0.5}) {
      const double est = oracle::power_iteration_norm_sq(m, n, h, 2000, 99);
      worst_ratio = std::max(worst_ratio, est / squared_norm_bound(h));
    }
  }
  o.pass = o.pass && worst_ratio <= 1.0;
  o.detail = fmt("adjoint residual %.2e (tol %.0e), max ||K||^2 / (8/h^2) = %.4f", worst, kAdjointTol,
                 worst_ratio);
  return o;
}

// ---- 2: resolvents

Outcome resolvents() {
  constexpr double kTol = 1e-7;
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> comp(-3.0, 3.0);
  std::uniform_real_distribution<double> logu(-3.0, 1.0);
  double worst[3] = {0, 0, 0};
  bool exact = true;
  for (int c = 0; c < 200; ++c) {
    const double a = comp(rng);
    const double b = comp(rng);
    const double sigma = std::pow(10.0, logu(rng));
    const double param = std::pow(10.0, logu(rng));
    const VectorField pt(1, 1, {a}, {b});
    auto err = [&](const VectorField& got, std::array<double, 2> want) {
      return std::max(std::abs(got.first()[0] - want[0]), std::abs(got.second()[0] - want[1]));
    };
    worst[0] = std::max(worst[0], err(prox_dual_tv(pt, sigma),
                                      oracle::dual_prox_numeric(a, b, sigma, oracle::Conjugate::kTv, 0.0)));
    worst[1] = std::max(worst[1], err(prox_dual_huber(pt, sigma, param),
                                      oracle::dual_prox_numeric(a, b, sigma, oracle::Conjugate::kHuber, param)));
    worst[2] = std::max(worst[2],
                        err(prox_dual_double_phase(pt, sigma, ScalarField(1, 1, param)),
                            oracle::dual_prox_numeric(a, b, sigma, oracle::Conjugate::kHalfWeight, param)));
    exact = exact && prox_dual_double_phase(pt, sigma, ScalarField(1, 1, 0.0)) == prox_dual_tv(pt, sigma);
  }
  const VectorField big = oracle::random_vector_field(64, 64, 5, 3.0);
  exact = exact && prox_dual_double_phase(big, 0.7, ScalarField(64, 64, 0.0)) == prox_dual_tv(big, 0.7);
  Outcome o;
  o.pass = worst[0] <= kTol && worst[1] <= kTol && worst[2] <= kTol && exact;
  o.detail = fmt("max error tv %.1e huber %.1e dp %.1e (tol %.0e), w=0 bit-exact %s", worst[0], worst[1],
                 worst[2], kTol, exact ? "yes" : "no");
  return o;
}

// ---- 3: solver optimality

Outcome optimality() {
  constexpr double kEnergyTol = 1e-5;
  constexpr double kLimitTol = 1e-5;
  constexpr double kOracleGap = 1e-10;
  const double lambdas[] = {0.1, 0.24, 0.5};
  SolverConfig tight;
  tight.stop_tol = 1e-12;
  tight.max_iters = 5000000;
  double worst_energy = 0.0;
  double worst_limit = 0.0;
  bool oracle_ok = true;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = 16 + 16 * static_cast<std::size_t>(inst % 4);  // 16..64
    const ScalarField g = oracle::random_field(n, 1, 500 + inst);
    const ScalarField w = oracle::random_field(n, 1, 600 + inst, 0.0, 20.0);
    const double lambda = lambdas[inst % 3];
    const double alpha = 0.01 * (1 + inst % 5);
    struct Case {
      Regularizer reg;
      oracle::Model model;
      double param;
      const ScalarField* weight;
    };
    const Case cases[] = {{TotalVariation{}, oracle::Model::kTv, 0.0, nullptr},
                          {Huber{alpha}, oracle::Model::kHuber, alpha, nullptr},
                          {DoublePhase{w}, oracle::Model::kDoublePhase, 0.0, &w}};
    for (const Case& c : cases) {
      const oracle::DualSolution ref = oracle::solve_dual(g, lambda, c.model, c.param, c.weight, kOracleGap, 20000000);
      oracle_ok = oracle_ok && ref.primal - ref.dual <= kOracleGap * std::abs(ref.primal);
      SolverConfig acc = tight;
      SolverConfig std_cfg = tight;
      std_cfg.accelerated = false;
      const SolveResult ra = solve({lambda, g}, c.reg, acc);
      const SolveResult rs = solve({lambda, g}, c.reg, std_cfg);
      for (const SolveResult* r : {&ra, &rs}) {
        const double e = primal_energy(r->u, {lambda, g}, c.reg);
        worst_energy = std::max(worst_energy, std::abs(e - ref.primal) / std::abs(ref.primal));
      }
      double diff = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) diff = std::max(diff, std::abs(ra.u[k] - rs.u[k]));
      worst_limit = std::max(worst_limit, diff);
    }
  }
  Outcome o;
  o.pass = oracle_ok && worst_energy <= kEnergyTol && worst_limit <= kLimitTol;
  o.detail = fmt("max relative energy gap %.1e (tol %.0e), max |u_acc - u_std| %.1e (tol %.0e), oracle gap<=%.0e %s",
                 worst_energy, kEnergyTol, worst_limit, kLimitTol, kOracleGap, oracle_ok ? "yes" : "no");
  return o;
}

// ---- 4: acceleration

Outcome acceleration() {
  // Double-gradient image with the ROF/Huber/double-phase parameters of the
  // iteration-count comparison: sigma 0.01, lambda 0.06, W1(50, 1000), r = 2.
  constexpr double kSameOrder = 3.0;
  const ScalarField original = make_synthetic(SyntheticKind::kDoubleGradient, 512);
  const ScalarField g = add_gaussian_noise(original, {0.01, 7});
  int iters[3][2] = {};
  int pre = 0;
  const Model models[] = {Model::kRof, Model::kHuber, Model::kDpAdaptive};
  for (int m = 0; m < 3; ++m) {
    for (int a = 0; a < 2; ++a) {
      ModelConfig c;
      c.model = models[m];
      c.lambda = 0.06;
      c.solver.accelerated = a == 0;
      c.solver.stop_tol = 1e-4;
      if (models[m] == Model::kHuber) c.alpha = 0.01;
      if (models[m] == Model::kDpAdaptive) c.weight = WeightSpec{WeightW1{50, 1000}, 2};
      const RunResult r = run_model(g, c);
      iters[m][a] = r.iterations;
      if (models[m] == Model::kDpAdaptive && a == 0) pre = r.pre_iterations;
    }
  }
  bool faster = true;
  for (auto& row : iters) faster = faster && row[0] < row[1];
  const double ratio = static_cast<double>(iters[2][0]) / iters[0][0];
  const bool same_order = ratio <= kSameOrder && ratio >= 1.0 / kSameOrder;
  const bool huber_slower = iters[1][0] > iters[0][0];
  Outcome o;
  o.pass = faster && same_order && huber_slower;
  o.detail = fmt("accelerated/standard rof %d/%d huber %d/%d dp %d/%d (+%d pre); accelerated<standard %s, "
                 "dp/rof %.2f within %.0fx %s, huber>rof %s",
                 iters[0][0], iters[0][1], iters[1][0], iters[1][1], iters[2][0], iters[2][1], pre,
                 faster ? "yes" : "no", ratio, kSameOrder, same_order ? "yes" : "no", huber_slower ? "yes" : "no");
  return o;
}

// ---- 5: staircasing in 1D

Outcome staircasing() {
  // Saw signal of 1024 nodes, 3 jumps, ramps of 0.1; d_tv averaged over seeds 1..8.
  constexpr double kAgreement = 0.05;
  constexpr int kSeeds = 8;
  const ScalarField original = make_synthetic(SyntheticKind::kSaw, 1024, {3, 0.1});
  auto mean_dtv = [&](double sigma) {
    std::array<double, 3> d{};  // rof, dp-noisy, dp-adaptive
    for (int s = 1; s <= kSeeds; ++s) {
      const ScalarField g = add_gaussian_noise(original, {sigma, static_cast<std::uint64_t>(s)});
      const Model models[] = {Model::kRof, Model::kDpNoisy, Model::kDpAdaptive};
      for (int m = 0; m < 3; ++m) {
        ModelConfig c;
        c.model = models[m];
        c.lambda = 0.24;
        if (models[m] != Model::kRof) c.weight = WeightSpec{WeightW1{500, 5000}, 0};
        d[m] += d_tv_image(run_model(g, c).u, original) / kSeeds;
      }
    }
    return d;
  };
  Outcome o;
  std::string detail;
  for (double sigma : {0.05, 0.1}) {
    const auto d = mean_dtv(sigma);
    const bool ordered = d[2] < d[1] && d[1] < d[0];
    o.pass = o.pass && ordered;
    detail += fmt("sigma %g: adaptive %.3f < noisy %.3f < rof %.3f %s; ", sigma, d[2], d[1], d[0],
                  ordered ? "ok" : "violated");
  }
  for (double sigma : {1e-2, 1e-3, 1e-4}) {
    const auto d = mean_dtv(sigma);
    const double spread = *std::max_element(d.begin(), d.end()) - *std::min_element(d.begin(), d.end());
    o.pass = o.pass && spread <= kAgreement;
    detail += fmt("sigma %g spread %.4f%s; ", sigma, spread, spread <= kAgreement ? "" : " (>0.05)");
  }
  detail.resize(detail.size() - 2);
  o.detail = detail;
  return o;
}

// ---- 6: 2D metrics

Outcome metrics_2d() {
  constexpr double kSsimGap = 0.01;
  const ScalarField original = make_synthetic(SyntheticKind::kDoubleGradient, 256);
  SweepConfig sc;
  ModelConfig rof;
  ModelConfig dp;
  dp.model = Model::kDpAdaptive;
  dp.weight = WeightSpec{WeightW1{200, 1000}, 0};
  sc.models = {rof, dp};
  sc.lambdas = {0.005, 0.01, 0.02, 0.04, 0.06, 0.1, 0.14, 0.2, 0.3};
  sc.sigmas = {0.01};
  sc.seed = 1;
  const std::vector<SweepRow> rows = run_sweep(original, sc);
  // Best-SSIM cell per model; PSNR is read at that cell.
  const SweepRow* best[2] = {nullptr, nullptr};
  for (const SweepRow& r : rows) {
    const int k = r.model == Model::kRof ? 0 : 1;
    if (!best[k] || r.metrics.ssim > best[k]->metrics.ssim) best[k] = &r;
  }
  const double gap = best[1]->metrics.ssim - best[0]->metrics.ssim;
  const bool psnr_ok = best[1]->metrics.psnr.db > best[0]->metrics.psnr.db;
  Outcome o;
  o.pass = gap > 0.0 && gap >= kSsimGap && psnr_ok;
  o.detail = fmt("ssim dp %.4f (lambda %g) vs rof %.4f (lambda %g), gap %.4f (floor %.2f); psnr %.2f vs %.2f dB %s",
                 best[1]->metrics.ssim, best[1]->lambda, best[0]->metrics.ssim, best[0]->lambda, gap, kSsimGap,
                 best[1]->metrics.psnr.db, best[0]->metrics.psnr.db, psnr_ok ? "ok" : "violated");
  return o;
}

// ---- 7: weight functions

Outcome weight_properties() {
  constexpr double kRescaleTol = 1e-12;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> logu(-2.0, 3.0);
  std::uniform_int_distribution<int> family(0, 2);
  int failures = 0;
  double worst_rescale = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const double p = std::pow(10.0, logu(rng));
    const double q = std::pow(10.0, logu(rng));
    WeightSpec spec;
    switch (family(rng)) {
      case 0: spec.family = WeightW1{p, q}; break;
      case 1: spec.family = WeightW2{p, q}; break;
      default: spec.family = WeightW3{p, q / 100.0}; break;
    }
    const double cut = spec.cutoff();
    const bool w3 = std::holds_alternative<WeightW3>(spec.family);
    bool ok = eval_weight_function(spec, 0.0) > 0.0 && eval_weight_function(spec, 0.0) == spec.peak();
    // Zero crossing exactly at the cutoff: W3 keeps its height up to R.
    ok = ok && (w3 ? eval_weight_function(spec, cut) > 0.0 : eval_weight_function(spec, cut) == 0.0);
    ok = ok && eval_weight_function(spec, std::nextafter(cut, 1e300)) == 0.0;
    // Positive up to the crossing, within a few ulps (a - b x rounds to 0 just below a/b).
    ok = ok && eval_weight_function(spec, cut * (1.0 - 8.0 * std::numeric_limits<double>::epsilon())) > 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 1000; ++k) {
      const double x = 2.0 * cut * k / 1000.0;
      const double v = eval_weight_function(spec, x);
      ok = ok && v <= prev && v >= 0.0 && (x <= cut || v == 0.0);
      prev = v;
    }
    const double alpha = std::pow(10.0, logu(rng) / 2.0);
    const double beta = std::pow(10.0, logu(rng) / 2.0);
    const WeightSpec scaled = rescale_weight_spec(spec, alpha, beta);
    const double scale = std::max(1.0, alpha * spec.peak());
    for (int k = 0; k < 1000; ++k) {
      const double x = 2.0 * cut / beta * k / 999.0;
      const double err = std::abs(eval_weight_function(scaled, x) - alpha * eval_weight_function(spec, beta * x));
      // The rescaled cutoff may land one ulp off beta * x; allow that single boundary sample.
      const bool boundary = std::abs(beta * x - cut) <= 4 * std::numeric_limits<double>::epsilon() * cut;
      if (!boundary) worst_rescale = std::max(worst_rescale, err / scale);
    }
    failures += ok ? 0 : 1;
  }
  Outcome o;
  o.pass = failures == 0 && worst_rescale <= kRescaleTol;
  o.detail = fmt("%d of 1000 parameterizations violate shape properties; rescale error %.1e (tol %.0e, relative to max(1, peak))",
                 failures, worst_rescale, kRescaleTol);
  return o;
}

// ---- 8: determinism

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "dprof_acceptance";
  std::filesystem::create_directories(dir);
  auto run = [&](const std::string& name) {
    const std::string path = (dir / name).string();
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli({"sweep", "--synthetic", "saw", "--size", "256", "--models",
                              "rof,huber,dp-adaptive,dp-noisy", "--alpha", "0.01", "--lambdas", "0.1,0.24",
                              "--sigmas", "0.01,0.05", "--seed", "17", "--csv", path},
                             out, err);
    std::ifstream f(path, std::ios::binary);
    return std::make_pair(code, std::string(std::istreambuf_iterator<char>(f), {}));
  };
  const auto a = run("a.csv");
  const auto b = run("b.csv");
  std::filesystem::remove_all(dir);
  Outcome o;
  o.pass = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  o.detail = fmt("two sweeps, %zu bytes each, identical %s", a.second.size(), a.second == b.second ? "yes" : "no");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "operator adjointness and norm bound", 5, operators},
      {2, "dual resolvents match numerical minimization", 30, resolvents},
      {3, "solver energy matches dual oracle", 120, optimality},
      {4, "accelerated iteration counts", 300, acceleration},
      {5, "1D staircasing ordering", 120, staircasing},
      {6, "2D SSIM/PSNR ordering", 900, metrics_2d},
      {7, "weight function properties", 5, weight_properties},
      {8, "sweep determinism", 60, determinism},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
