#include "dprof/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dprof {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Dual resolvent specialised to one regularizer. For the double-phase model the
// conjugate of t + w t^2 is max(0, t - 1)^2 / (4w), which is the published
// resolvent evaluated at weight 2w.
class DualProx {
 public:
  explicit DualProx(const Regularizer& reg) : reg_(reg) {
    if (const auto* dp = std::get_if<DoublePhase>(&reg)) {
      conjugate_weight_ = dp->weight;
      for (double& w : conjugate_weight_.values()) w *= 2.0;
    }
  }

  void apply(VectorField& p, double sigma) const {
    std::visit(overloaded{
                   [&](const TotalVariation&) { prox_dual_tv_inplace(p); },
                   [&](const Huber& h) { prox_dual_huber_inplace(p, sigma, h.alpha); },
                   [&](const DoublePhase&) {
                     prox_dual_double_phase_inplace(p, sigma, conjugate_weight_);
                   },
               },
               reg_);
  }

 private:
  const Regularizer& reg_;
  ScalarField conjugate_weight_;
};

SolveResult run(const FidelityParams& fidelity, const Regularizer& reg, const SolverConfig& cfg,
                const SolveOptions& options, bool accelerated) {
  fidelity.validate();
  validate(reg);
  cfg.validate(fidelity.datum.spacing());
  if (const auto* dp = std::get_if<DoublePhase>(&reg);
      dp != nullptr && !dp->weight.same_shape(fidelity.datum)) {
    throw std::invalid_argument("weight and datum shapes differ");
  }
  const double gamma = cfg.gamma_for(fidelity.lambda);
  if (accelerated && !(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  const ScalarField& g = fidelity.datum;
  ScalarField x = options.initial.value_or(g);
  if (!x.same_shape(g)) throw std::invalid_argument("initial iterate has the wrong shape");

  const DualProx dual_prox(reg);
  VectorField y(g.rows(), g.cols(), g.spacing());
  VectorField grad(g.rows(), g.cols(), g.spacing());
  ScalarField x_bar = x;
  ScalarField x_new = x;
  ScalarField div(g.rows(), g.cols(), 0.0, g.spacing());

  double tau = cfg.tau0;
  double sigma = cfg.sigma0;

  SolveResult result;
  result.residual_history.reserve(static_cast<std::size_t>(std::min(cfg.max_iters, 100000)));
  if (options.diagnostics != nullptr) *options.diagnostics << "iter,residual,energy\n";

  for (int n = 0; n < cfg.max_iters; ++n) {
    gradient_into(x_bar, grad);
    {
      auto y1 = y.first();
      auto y2 = y.second();
      auto g1 = grad.first();
      auto g2 = grad.second();
      for (std::size_t k = 0; k < y1.size(); ++k) {
        y1[k] += sigma * g1[k];
        y2[k] += sigma * g2[k];
      }
    }
    dual_prox.apply(y, sigma);

    divergence_into(y, div);
    {
      auto xn = x_new.values();
      auto xv = x.values();
      auto dv = div.values();
      for (std::size_t k = 0; k < xn.size(); ++k) xn[k] = xv[k] + tau * dv[k];
    }
    prox_fidelity_inplace(x_new, fidelity, tau);

    double theta = cfg.theta;
    if (accelerated) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
      tau *= theta;
      sigma /= theta;
    }

    const double residual = stopping_residual(x, x_new);
    {
      auto xb = x_bar.values();
      auto xn = x_new.values();
      auto xv = x.values();
      for (std::size_t k = 0; k < xb.size(); ++k) xb[k] = xn[k] + theta * (xn[k] - xv[k]);
    }
    std::swap(x, x_new);

    result.residual_history.push_back(residual);
    result.iterations = n + 1;
    if (options.diagnostics != nullptr) {
      *options.diagnostics << (n + 1) << ',' << residual << ',' << primal_energy(x, fidelity, reg)
                           << '\n';
    }
    if (residual <= cfg.stop_tol) {
      result.converged = true;
      break;
    }
  }

  result.u = std::move(x);
  result.p = std::move(y);
  return result;
}

}  // namespace

void SolverConfig::validate(double spacing) const {
  if (!(tau0 > 0.0) || !(sigma0 > 0.0)) throw std::invalid_argument("step sizes must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (gamma && !(*gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be positive");
  const double product = tau0 * sigma0 * squared_norm_bound(spacing, norm_reading);
  const bool ok = accelerated ? product <= 1.0 : product < 1.0;
  if (!ok) {
    throw std::invalid_argument("step sizes violate tau*sigma*L^2 bound: product = " +
                                std::to_string(product));
  }
}

double SolveResult::final_residual() const {
  return residual_history.empty() ? std::numeric_limits<double>::infinity()
                                  : residual_history.back();
}

double stopping_residual(const ScalarField& prev, const ScalarField& curr) {
  return distance(curr, prev) / std::max(norm(prev), std::numeric_limits<double>::min());
}

double huber_value(double t, double alpha) {
  const double a = std::abs(t);
  return a <= alpha ? a * a / (2.0 * alpha) : a - alpha / 2.0;
}

double primal_energy(const ScalarField& u, const FidelityParams& fidelity, const Regularizer& reg) {
  if (!u.same_shape(fidelity.datum)) throw std::invalid_argument("primal_energy: shape mismatch");
  const VectorField grad = gradient(u);
  double regularization = 0.0;
  std::visit(overloaded{
                 [&](const TotalVariation&) {
                   for (std::size_t k = 0; k < grad.size(); ++k) regularization += grad.magnitude(k);
                 },
                 [&](const Huber& h) {
                   for (std::size_t k = 0; k < grad.size(); ++k) {
                     regularization += huber_value(grad.magnitude(k), h.alpha);
                   }
                 },
                 [&](const DoublePhase& dp) {
                   if (!dp.weight.same_shape(u)) {
                     throw std::invalid_argument("primal_energy: weight shape mismatch");
                   }
                   for (std::size_t k = 0; k < grad.size(); ++k) {
                     const double t = grad.magnitude(k);
                     regularization += t + dp.weight[k] * t * t;
                   }
                 },
             },
             reg);
  const double misfit = distance(u, fidelity.datum);
  return regularization + misfit * misfit / (2.0 * fidelity.lambda);
}

SolveResult solve_standard(const FidelityParams& fidelity, const Regularizer& reg,
                           const SolverConfig& cfg, const SolveOptions& options) {
  if (cfg.accelerated) throw std::invalid_argument("solve_standard requires accelerated = false");
  return run(fidelity, reg, cfg, options, false);
}

SolveResult solve_accelerated(const FidelityParams& fidelity, const Regularizer& reg,
                              const SolverConfig& cfg, const SolveOptions& options) {
  if (!cfg.accelerated) throw std::invalid_argument("solve_accelerated requires accelerated = true");
  return run(fidelity, reg, cfg, options, true);
}

SolveResult solve(const FidelityParams& fidelity, const Regularizer& reg, const SolverConfig& cfg,
                  const SolveOptions& options) {
  return run(fidelity, reg, cfg, options, cfg.accelerated);
}

}  // namespace dprof
