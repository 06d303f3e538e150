#include "dprof/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace dprof {

namespace {

void check_shape(std::size_t rows, std::size_t cols, double spacing) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("grid spacing must be positive and finite");
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

ScalarField::ScalarField(std::size_t rows, std::size_t cols, double value, double spacing)
    : rows_(rows), cols_(cols), spacing_(spacing), values_(rows * cols, value) {
  check_shape(rows, cols, spacing);
  if (!std::isfinite(value)) throw std::invalid_argument("field values must be finite");
}

ScalarField::ScalarField(std::size_t rows, std::size_t cols, std::vector<double> values,
                         double spacing)
    : rows_(rows), cols_(cols), spacing_(spacing), values_(std::move(values)) {
  check_shape(rows, cols, spacing);
  if (values_.size() != rows * cols) {
    throw std::invalid_argument("expected " + std::to_string(rows * cols) + " values, got " +
                                std::to_string(values_.size()));
  }
  if (!all_finite(values_)) throw std::invalid_argument("field values must be finite");
}

ScalarField ScalarField::signal(std::vector<double> values, double spacing) {
  const std::size_t n = values.size();
  return ScalarField(n, 1, std::move(values), spacing);
}

bool ScalarField::is_finite() const { return all_finite(values_); }

VectorField::VectorField(std::size_t rows, std::size_t cols, double spacing)
    : rows_(rows),
      cols_(cols),
      spacing_(spacing),
      first_(rows * cols, 0.0),
      second_(rows * cols, 0.0) {
  check_shape(rows, cols, spacing);
}

VectorField::VectorField(std::size_t rows, std::size_t cols, std::vector<double> first,
                         std::vector<double> second, double spacing)
    : rows_(rows),
      cols_(cols),
      spacing_(spacing),
      first_(std::move(first)),
      second_(std::move(second)) {
  check_shape(rows, cols, spacing);
  if (first_.size() != rows * cols || second_.size() != rows * cols) {
    throw std::invalid_argument("vector field components have the wrong size");
  }
  if (!is_finite()) throw std::invalid_argument("vector field components must be finite");
}

double VectorField::magnitude(std::size_t k) const { return std::hypot(first_[k], second_[k]); }

bool VectorField::is_finite() const { return all_finite(first_) && all_finite(second_); }

void gradient_into(const ScalarField& u, VectorField& out) {
  if (!out.same_shape(u) || out.spacing() != u.spacing()) {
    out = VectorField(u.rows(), u.cols(), u.spacing());
  }
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  const double inv_h = 1.0 / u.spacing();
  auto v = u.values();
  auto p1 = out.first();
  auto p2 = out.second();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t row = i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = row + j;
      p1[k] = (i + 1 < m) ? (v[k + n] - v[k]) * inv_h : 0.0;
      p2[k] = (j + 1 < n) ? (v[k + 1] - v[k]) * inv_h : 0.0;
    }
  }
}

VectorField gradient(const ScalarField& u) {
  VectorField out(u.rows(), u.cols(), u.spacing());
  gradient_into(u, out);
  return out;
}

void divergence_into(const VectorField& p, ScalarField& out) {
  if (out.rows() != p.rows() || out.cols() != p.cols() || out.spacing() != p.spacing()) {
    out = ScalarField(p.rows(), p.cols(), 0.0, p.spacing());
  }
  const std::size_t m = p.rows();
  const std::size_t n = p.cols();
  const double inv_h = 1.0 / p.spacing();
  auto p1 = p.first();
  auto p2 = p.second();
  auto d = out.values();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t row = i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = row + j;
      // Backward differences; the boundary terms mirror the zeroed forward
      // differences of the gradient.
      const double a1 = (i + 1 < m ? p1[k] : 0.0) - (i > 0 ? p1[k - n] : 0.0);
      const double a2 = (j + 1 < n ? p2[k] : 0.0) - (j > 0 ? p2[k - 1] : 0.0);
      d[k] = (a1 + a2) * inv_h;
    }
  }
}

ScalarField divergence(const VectorField& p) {
  ScalarField out(p.rows(), p.cols(), 0.0, p.spacing());
  divergence_into(p, out);
  return out;
}

ScalarField gradient_magnitude(const ScalarField& u) {
  const VectorField g = gradient(u);
  ScalarField out(u.rows(), u.cols(), 0.0, u.spacing());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = g.magnitude(k);
  return out;
}

double total_variation(const ScalarField& u) {
  const VectorField g = gradient(u);
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) sum += g.magnitude(k);
  return sum;
}

double inner_product(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner_product: shape mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

double inner_product(const VectorField& a, const VectorField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner_product: shape mismatch");
  double sum = 0.0;
  auto a1 = a.first();
  auto a2 = a.second();
  auto b1 = b.first();
  auto b2 = b.second();
  for (std::size_t k = 0; k < a.size(); ++k) sum += a1[k] * b1[k] + a2[k] * b2[k];
  return sum;
}

double norm(const ScalarField& a) { return std::sqrt(inner_product(a, a)); }

double norm(const VectorField& a) { return std::sqrt(inner_product(a, a)); }

double distance(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("distance: shape mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double operator_norm_bound(double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  return 8.0 / (spacing * spacing);
}

double squared_norm_bound(double spacing, NormBoundReading reading) {
  const double bound = operator_norm_bound(spacing);
  return reading == NormBoundReading::kSquaredNorm ? bound : bound * bound;
}

ScalarField mollify(const ScalarField& u, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("mollification radius must be nonnegative");
  }
  if (radius < 1.0) return u;

  const auto reach = static_cast<std::ptrdiff_t>(std::floor(radius));
  const std::ptrdiff_t reach_i = u.rows() > 1 ? reach : 0;
  const std::ptrdiff_t reach_j = u.cols() > 1 ? reach : 0;
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> offsets;
  for (std::ptrdiff_t di = -reach_i; di <= reach_i; ++di) {
    for (std::ptrdiff_t dj = -reach_j; dj <= reach_j; ++dj) {
      if (static_cast<double>(di * di + dj * dj) <= radius * radius) offsets.emplace_back(di, dj);
    }
  }
  const double weight = 1.0 / static_cast<double>(offsets.size());

  const auto m = static_cast<std::ptrdiff_t>(u.rows());
  const auto n = static_cast<std::ptrdiff_t>(u.cols());
  ScalarField out(u.rows(), u.cols(), 0.0, u.spacing());
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (const auto& [di, dj] : offsets) {
        const auto ii = std::clamp<std::ptrdiff_t>(i + di, 0, m - 1);
        const auto jj = std::clamp<std::ptrdiff_t>(j + dj, 0, n - 1);
        sum += u(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
      }
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = sum * weight;
    }
  }
  return out;
}

ScalarField add_gaussian_noise(const ScalarField& u, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw std::invalid_argument("noise sigma must be nonnegative");
  }
  if (spec.sigma == 0.0) return u;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma);
  ScalarField out = u;
  for (double& v : out.values()) v += normal(rng);
  return out;
}

}  // namespace dprof
