#include "dprof/weights.hpp"

#include <algorithm>
#include <cmath>
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

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

// Linear families: zero from a/b onwards, exactly.
double linear_weight(double a, double b, double x) {
  if (x >= a / b) return 0.0;
  return std::max(0.0, a - b * x);
}

}  // namespace

void WeightSpec::validate() const {
  std::visit(overloaded{
                 [](const WeightW1& w) {
                   require_positive(w.a, "W1 a");
                   require_positive(w.b, "W1 b");
                 },
                 [](const WeightW2& w) {
                   require_positive(w.a, "W2 a");
                   require_positive(w.b, "W2 b");
                 },
                 [](const WeightW3& w) {
                   require_positive(w.height, "W3 height");
                   require_positive(w.cutoff, "W3 cutoff");
                 },
             },
             family);
  if (!(mollify_radius >= 0.0) || !std::isfinite(mollify_radius)) {
    throw std::invalid_argument("mollification radius must be nonnegative");
  }
}

double WeightSpec::peak() const { return eval_weight_function(*this, 0.0); }

double WeightSpec::cutoff() const {
  return std::visit(overloaded{
                        [](const WeightW1& w) { return w.a / w.b; },
                        [](const WeightW2& w) { return w.a / w.b; },
                        [](const WeightW3& w) { return w.cutoff; },
                    },
                    family);
}

double eval_weight_function(const WeightSpec& spec, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("weight argument must be nonnegative");
  return std::visit(overloaded{
                        [x](const WeightW1& w) {
                          return linear_weight(w.a, w.b, std::max(x, w.a / (2.0 * w.b)));
                        },
                        [x](const WeightW2& w) { return linear_weight(w.a, w.b, x); },
                        [x](const WeightW3& w) { return x <= w.cutoff ? w.height : 0.0; },
                    },
                    spec.family);
}

WeightSpec rescale_weight_spec(const WeightSpec& spec, double alpha, double beta) {
  require_positive(alpha, "rescale alpha");
  require_positive(beta, "rescale beta");
  WeightSpec out = spec;
  // alpha * (a - b * beta x) = (alpha a) - (alpha beta b) x; the W1 plateau point
  // a/(2b beta) is preserved by the same substitution.
  out.family = std::visit(overloaded{
                              [&](const WeightW1& w) -> WeightFamily {
                                return WeightW1{alpha * w.a, alpha * beta * w.b};
                              },
                              [&](const WeightW2& w) -> WeightFamily {
                                return WeightW2{alpha * w.a, alpha * beta * w.b};
                              },
                              [&](const WeightW3& w) -> WeightFamily {
                                return WeightW3{alpha * w.height, w.cutoff / beta};
                              },
                          },
                          spec.family);
  return out;
}

WeightResult weight_from_field(const ScalarField& source, const WeightSpec& spec,
                               MollifyOrder order) {
  spec.validate();
  WeightResult result;
  if (order == MollifyOrder::kMollifyThenDifferentiate) {
    result.gradient_magnitude = gradient_magnitude(mollify(source, spec.mollify_radius));
  } else {
    result.gradient_magnitude = mollify(gradient_magnitude(source), spec.mollify_radius);
  }
  result.weight = result.gradient_magnitude;
  for (double& v : result.weight.values()) {
    result.max_gradient = std::max(result.max_gradient, v);
    v = eval_weight_function(spec, v);
  }
  return result;
}

AdaptiveWeight build_weight_adaptive(const ScalarField& g, double lambda, const WeightSpec& spec,
                                     const SolverConfig& cfg, MollifyOrder order) {
  spec.validate();
  const FidelityParams fidelity{lambda, g};
  SolveResult rof = solve(fidelity, TotalVariation{}, cfg);
  AdaptiveWeight out;
  out.weight = weight_from_field(rof.u, spec, order);
  out.rof_iterations = rof.iterations;
  out.rof_converged = rof.converged;
  out.rof_residual = rof.final_residual();
  out.u_rof = std::move(rof.u);
  return out;
}

WeightResult build_weight_noisy(const ScalarField& g, const WeightSpec& spec, MollifyOrder order) {
  return weight_from_field(g, spec, order);
}

}  // namespace dprof
