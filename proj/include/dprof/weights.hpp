#pragma once

#include <optional>
#include <variant>

#include "dprof/grid.hpp"
#include "dprof/solver.hpp"

namespace dprof {

/// W1(x) = max(0, a - b max(x, a/(2b)))
struct WeightW1 {
  double a = 500.0;
  double b = 5000.0;
};

/// W2(x) = max(0, a - b x)
struct WeightW2 {
  double a = 60.0;
  double b = 900.0;
};

/// W3(x) = height on [0, cutoff], 0 beyond.
struct WeightW3 {
  double height = 1.0;
  double cutoff = 0.1;
};

using WeightFamily = std::variant<WeightW1, WeightW2, WeightW3>;

struct WeightSpec {
  WeightFamily family = WeightW1{};
  /// Mollification radius in pixels.
  double mollify_radius = 0.0;

  void validate() const;
  /// W(0).
  double peak() const;
  /// Smallest x with W(x) == 0 (a/b for W1, W2); W3 vanishes strictly beyond it.
  double cutoff() const;
};

double eval_weight_function(const WeightSpec& spec, double x);

/// Spec whose weight function is x -> alpha * W(beta * x), same family.
WeightSpec rescale_weight_spec(const WeightSpec& spec, double alpha, double beta);

enum class MollifyOrder {
  /// |grad (rho_r * u)|
  kMollifyThenDifferentiate,
  /// rho_r * |grad u|
  kDifferentiateThenMollify,
};

struct WeightResult {
  ScalarField weight;
  /// Gradient magnitude the weight function was applied to.
  ScalarField gradient_magnitude;
  double max_gradient = 0.0;
};

/// Shared tail of both pipelines: smooth, differentiate, apply W.
WeightResult weight_from_field(const ScalarField& source, const WeightSpec& spec,
                               MollifyOrder order = MollifyOrder::kMollifyThenDifferentiate);

struct AdaptiveWeight {
  WeightResult weight;
  ScalarField u_rof;
  int rof_iterations = 0;
  bool rof_converged = false;
  double rof_residual = 0.0;
};

/// ROF pre-solve for (g, lambda), then weight_from_field on its minimizer.
/// Non-convergence of the pre-solve is reported, not thrown.
AdaptiveWeight build_weight_adaptive(const ScalarField& g, double lambda, const WeightSpec& spec,
                                     const SolverConfig& cfg,
                                     MollifyOrder order = MollifyOrder::kMollifyThenDifferentiate);

/// weight_from_field applied directly to the noisy datum.
WeightResult build_weight_noisy(const ScalarField& g, const WeightSpec& spec,
                                MollifyOrder order = MollifyOrder::kMollifyThenDifferentiate);

}  // namespace dprof
