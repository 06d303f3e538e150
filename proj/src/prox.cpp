#include "dprof/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

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

}  // namespace

void FidelityParams::validate() const {
  require_positive(lambda, "lambda");
  if (datum.empty() || !datum.is_finite()) throw std::invalid_argument("datum must be finite");
}

void validate(const Regularizer& reg) {
  std::visit(overloaded{
                 [](const TotalVariation&) {},
                 [](const Huber& h) { require_positive(h.alpha, "huber alpha"); },
                 [](const DoublePhase& dp) {
                   if (dp.weight.empty()) throw std::invalid_argument("weight field is empty");
                   for (double w : dp.weight.values()) {
                     if (!(w >= 0.0) || !std::isfinite(w)) {
                       throw std::invalid_argument("weight must be nonnegative and finite");
                     }
                   }
                 },
             },
             reg);
}

void prox_fidelity_inplace(ScalarField& u, const FidelityParams& params, double tau) {
  require_positive(tau, "tau");
  require_positive(params.lambda, "lambda");
  if (!u.same_shape(params.datum)) throw std::invalid_argument("prox_fidelity: shape mismatch");
  const double ratio = tau / params.lambda;
  const double denom = 1.0 + ratio;
  auto g = params.datum.values();
  auto v = u.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (v[k] + ratio * g[k]) / denom;
}

ScalarField prox_fidelity(const ScalarField& u_tilde, const FidelityParams& params, double tau) {
  ScalarField u = u_tilde;
  prox_fidelity_inplace(u, params, tau);
  return u;
}

void prox_dual_tv_inplace(VectorField& p) {
  auto p1 = p.first();
  auto p2 = p.second();
  for (std::size_t k = 0; k < p1.size(); ++k) {
    const double scale = std::max(1.0, std::hypot(p1[k], p2[k]));
    p1[k] /= scale;
    p2[k] /= scale;
  }
}

VectorField prox_dual_tv(const VectorField& p_tilde, double sigma) {
  require_positive(sigma, "sigma");
  VectorField p = p_tilde;
  prox_dual_tv_inplace(p);
  return p;
}

void prox_dual_huber_inplace(VectorField& p, double sigma, double alpha) {
  require_positive(sigma, "sigma");
  if (!(alpha >= 0.0)) throw std::invalid_argument("huber alpha must be nonnegative");
  const double shrink = 1.0 + sigma * alpha;
  auto p1 = p.first();
  auto p2 = p.second();
  for (std::size_t k = 0; k < p1.size(); ++k) {
    const double q1 = p1[k] / shrink;
    const double q2 = p2[k] / shrink;
    const double scale = std::max(1.0, std::hypot(q1, q2));
    p1[k] = q1 / scale;
    p2[k] = q2 / scale;
  }
}

VectorField prox_dual_huber(const VectorField& p_tilde, double sigma, double alpha) {
  VectorField p = p_tilde;
  prox_dual_huber_inplace(p, sigma, alpha);
  return p;
}

double double_phase_factor(double magnitude, double sigma, double weight) {
  if (weight == 0.0) return 1.0 / std::max(1.0, magnitude);
  if (magnitude == 0.0) return 1.0;
  const double wp = weight * magnitude;
  return std::min(1.0, (wp + sigma) / (wp + sigma * magnitude));
}

void prox_dual_double_phase_inplace(VectorField& p, double sigma, const ScalarField& weight) {
  require_positive(sigma, "sigma");
  if (!p.same_shape(weight)) throw std::invalid_argument("prox_dual_double_phase: shape mismatch");
  auto p1 = p.first();
  auto p2 = p.second();
  auto w = weight.values();
  for (std::size_t k = 0; k < p1.size(); ++k) {
    const double magnitude = std::hypot(p1[k], p2[k]);
    if (w[k] == 0.0) {
      // Same arithmetic as prox_dual_tv_inplace so the two agree bit for bit.
      const double scale = std::max(1.0, magnitude);
      p1[k] /= scale;
      p2[k] /= scale;
      continue;
    }
    const double f = double_phase_factor(magnitude, sigma, w[k]);
    p1[k] *= f;
    p2[k] *= f;
  }
}

VectorField prox_dual_double_phase(const VectorField& p_tilde, double sigma,
                                   const ScalarField& weight) {
  VectorField p = p_tilde;
  prox_dual_double_phase_inplace(p, sigma, weight);
  return p;
}

double double_phase_conjugate(const VectorField& p, const ScalarField& weight) {
  if (!p.same_shape(weight)) throw std::invalid_argument("double_phase_conjugate: shape mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double excess = std::max(0.0, p.magnitude(k) - 1.0);
    if (weight[k] == 0.0) {
      if (excess > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    sum += excess * excess / (2.0 * weight[k]);
  }
  return sum;
}

}  // namespace dprof
