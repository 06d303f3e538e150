#pragma once

#include <variant>

#include "dprof/grid.hpp"

namespace dprof {

/// G(u) = 1/(2 lambda) * sum |u - g|^2.
struct FidelityParams {
  double lambda = 1.0;
  ScalarField datum;

  void validate() const;
};

struct TotalVariation {};

struct Huber {
  double alpha = 0.01;
};

/// phi(x, t) = t + w(x) t^2 with a nonnegative weight field.
struct DoublePhase {
  ScalarField weight;
};

using Regularizer = std::variant<TotalVariation, Huber, DoublePhase>;

void validate(const Regularizer& reg);

/// Resolvent of tau * dG: (u_tilde + (tau/lambda) g) / (1 + tau/lambda).
ScalarField prox_fidelity(const ScalarField& u_tilde, const FidelityParams& params, double tau);
void prox_fidelity_inplace(ScalarField& u, const FidelityParams& params, double tau);

/// Pointwise projection onto the closed unit disk. sigma is unused.
VectorField prox_dual_tv(const VectorField& p_tilde, double sigma);

/// Shrink by 1/(1 + sigma alpha), then project onto the unit disk.
/// alpha == 0 reduces to prox_dual_tv.
VectorField prox_dual_huber(const VectorField& p_tilde, double sigma, double alpha);

/// Resolvent of sigma * dF* for F(p) = sum |p| + w |p|^2 as published:
///   w == 0:  p / max(1, |p|)
///   w >  0:  min(1, (w|p| + sigma) / (w|p| + sigma |p|)) p
/// The w > 0 branch is the resolvent of max(0, |p| - 1)^2 / (2w).
/// Throws std::invalid_argument on a shape mismatch.
VectorField prox_dual_double_phase(const VectorField& p_tilde, double sigma,
                                   const ScalarField& weight);

void prox_dual_tv_inplace(VectorField& p);
void prox_dual_huber_inplace(VectorField& p, double sigma, double alpha);
void prox_dual_double_phase_inplace(VectorField& p, double sigma, const ScalarField& weight);

/// Sum of max(0, |p| - 1)^2 / (2w) over nodes with w > 0; +infinity when a
/// node with w == 0 carries |p| > 1.
double double_phase_conjugate(const VectorField& p, const ScalarField& weight);

/// Scalar factor applied to p_tilde by the double-phase resolvent at one node.
double double_phase_factor(double magnitude, double sigma, double weight);

}  // namespace dprof
