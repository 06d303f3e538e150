#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "dprof/grid.hpp"
#include "dprof/prox.hpp"

namespace dprof {

struct SolverConfig {
  double tau0 = 0.25;
  double sigma0 = 0.25;
  /// Extrapolation weight of the standard variant.
  double theta = 1.0;
  /// Uniform-convexity constant of the accelerated variant. Unset means 1/lambda,
  /// the modulus of the fidelity term.
  std::optional<double> gamma;
  int max_iters = 10000;
  double stop_tol = 1e-4;
  bool accelerated = true;
  NormBoundReading norm_reading = NormBoundReading::kSquaredNorm;

  /// Throws std::invalid_argument when the step sizes violate
  /// tau0 * sigma0 * L^2 < 1 (<= 1 when accelerated) or a field is out of range.
  void validate(double spacing = 1.0) const;
  double gamma_for(double lambda) const { return gamma.value_or(1.0 / lambda); }
};

struct SolveResult {
  ScalarField u;
  VectorField p;
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;

  double final_residual() const;
};

struct SolveOptions {
  /// Starting primal iterate; the datum when unset.
  std::optional<ScalarField> initial;
  /// Receives "iter,residual,energy" rows when set.
  std::ostream* diagnostics = nullptr;
};

/// Relative primal change ||curr - prev|| / max(||prev||, DBL_MIN).
double stopping_residual(const ScalarField& prev, const ScalarField& curr);

/// Sum of phi(|grad u|) plus the fidelity term.
double primal_energy(const ScalarField& u, const FidelityParams& fidelity, const Regularizer& reg);

/// Huber function |t|_alpha.
double huber_value(double t, double alpha);

/// Primal-dual iterations with constant steps and extrapolation theta.
SolveResult solve_standard(const FidelityParams& fidelity, const Regularizer& reg,
                           const SolverConfig& cfg, const SolveOptions& options = {});

/// Primal-dual iterations with theta_n = 1/sqrt(1 + 2 gamma tau_n),
/// tau_{n+1} = theta_n tau_n, sigma_{n+1} = sigma_n / theta_n.
SolveResult solve_accelerated(const FidelityParams& fidelity, const Regularizer& reg,
                              const SolverConfig& cfg, const SolveOptions& options = {});

/// Dispatches on cfg.accelerated.
SolveResult solve(const FidelityParams& fidelity, const Regularizer& reg, const SolverConfig& cfg,
                  const SolveOptions& options = {});

}  // namespace dprof
