#pragma once

#include <stdexcept>

#include "dprof/grid.hpp"

namespace dprof {

/// Raised when a metric is undefined for its inputs (constant original,
/// zero original, grid smaller than the SSIM window).
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// TV(result - original) / TV(original).
double d_tv_image(const ScalarField& result, const ScalarField& original);

/// ||result - original|| / ||original||.
double d_l2_image(const ScalarField& result, const ScalarField& original);

struct Psnr {
  double db = 0.0;
  /// Set when the inputs are identical; db is +infinity then.
  bool infinite = false;
};

/// 10 log10(peak^2 / MSE).
Psnr psnr(const ScalarField& result, const ScalarField& original, double peak = 1.0);

struct SsimParams {
  int window = 11;
  double gaussian_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all window positions fully inside the grid, Gaussian
/// window. Axes of extent 1 use a window of extent 1.
double ssim(const ScalarField& a, const ScalarField& b, const SsimParams& params = {});

struct MetricReport {
  double d_tv = 0.0;
  double d_l2 = 0.0;
  Psnr psnr;
  double ssim = 0.0;
  /// ||result - noisy|| / ||noisy||.
  double d_l2_noisy = 0.0;
};

MetricReport evaluate(const ScalarField& result, const ScalarField& original,
                      const ScalarField& noisy, const SsimParams& params = {});

}  // namespace dprof
