#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dprof {

/// Real-valued function on an M x N Cartesian grid, stored row-major.
/// One-dimensional signals are M x 1 grids.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(std::size_t rows, std::size_t cols, double value = 0.0, double spacing = 1.0);
  /// Throws std::invalid_argument unless values.size() == rows * cols, spacing > 0
  /// and every value is finite.
  ScalarField(std::size_t rows, std::size_t cols, std::vector<double> values,
              double spacing = 1.0);

  static ScalarField signal(std::vector<double> values, double spacing = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return spacing_; }
  bool empty() const { return values_.empty(); }
  bool is_1d() const { return cols_ == 1 || rows_ == 1; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const ScalarField& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool is_finite() const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double spacing_ = 1.0;
  std::vector<double> values_;
};

/// Pair of components (p1, p2) per grid node; p1 differentiates along rows
/// (index i), p2 along columns (index j).
class VectorField {
 public:
  VectorField() = default;
  VectorField(std::size_t rows, std::size_t cols, double spacing = 1.0);
  VectorField(std::size_t rows, std::size_t cols, std::vector<double> first,
              std::vector<double> second, double spacing = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return first_.size(); }
  double spacing() const { return spacing_; }

  std::span<const double> first() const { return first_; }
  std::span<double> first() { return first_; }
  std::span<const double> second() const { return second_; }
  std::span<double> second() { return second_; }

  /// Euclidean length of the 2-vector at flat index k.
  double magnitude(std::size_t k) const;

  bool same_shape(const ScalarField& f) const { return rows_ == f.rows() && cols_ == f.cols(); }
  bool same_shape(const VectorField& v) const { return rows_ == v.rows_ && cols_ == v.cols_; }
  bool is_finite() const;

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double spacing_ = 1.0;
  std::vector<double> first_;
  std::vector<double> second_;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Forward differences divided by h; the first component vanishes on the last
/// row and the second on the last column.
VectorField gradient(const ScalarField& u);
void gradient_into(const ScalarField& u, VectorField& out);

/// Negative adjoint of gradient: <grad u, p> = -<u, div p>.
ScalarField divergence(const VectorField& p);
void divergence_into(const VectorField& p, ScalarField& out);

/// |grad u| per node.
ScalarField gradient_magnitude(const ScalarField& u);

/// Sum of Euclidean gradient magnitudes (isotropic discrete TV).
double total_variation(const ScalarField& u);

// Row-major, fixed-order reductions.
double inner_product(const ScalarField& a, const ScalarField& b);
double inner_product(const VectorField& a, const VectorField& b);
double norm(const ScalarField& a);
double norm(const VectorField& a);
double distance(const ScalarField& a, const ScalarField& b);

/// How the published constant 8/h^2 is read when bounding ||grad||^2.
enum class NormBoundReading {
  kSquaredNorm,  ///< 8/h^2 bounds L^2 (default)
  kNorm,         ///< 8/h^2 bounds L, so L^2 <= 64/h^4
};

/// Returns 8/h^2, the constant bounding the gradient operator.
double operator_norm_bound(double spacing);

/// Upper bound for L^2 = ||grad||^2 used in step-size checks.
double squared_norm_bound(double spacing, NormBoundReading reading = NormBoundReading::kSquaredNorm);

/// Convolution with the normalized indicator of the discrete disk {|d| <= r}
/// (grid units), clamp-to-edge padding. Axes of extent 1 are not smoothed.
/// Radii below 1 return u unchanged.
ScalarField mollify(const ScalarField& u, double radius);

/// u + n with n i.i.d. N(0, sigma^2) from a generator seeded by spec.seed.
/// The result is not clamped.
ScalarField add_gaussian_noise(const ScalarField& u, const NoiseSpec& spec);

}  // namespace dprof
