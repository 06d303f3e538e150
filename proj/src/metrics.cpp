#include "dprof/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dprof {

namespace {

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

std::vector<double> gaussian_taps(int length, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(length));
  const double center = (length - 1) / 2.0;
  double sum = 0.0;
  for (int t = 0; t < length; ++t) {
    const double d = t - center;
    taps[static_cast<std::size_t>(t)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(t)];
  }
  for (double& v : taps) v /= sum;
  return taps;
}

// Separable correlation keeping only positions where the window fits.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t rows, std::size_t cols,
                                 const std::vector<double>& taps_i,
                                 const std::vector<double>& taps_j) {
  const std::size_t out_cols = cols - taps_j.size() + 1;
  const std::size_t out_rows = rows - taps_i.size() + 1;
  std::vector<double> horizontal(rows * out_cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < taps_j.size(); ++t) s += taps_j[t] * src[i * cols + j + t];
      horizontal[i * out_cols + j] = s;
    }
  }
  std::vector<double> out(out_rows * out_cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < taps_i.size(); ++t) s += taps_i[t] * horizontal[(i + t) * out_cols + j];
      out[i * out_cols + j] = s;
    }
  }
  return out;
}

}  // namespace

double d_tv_image(const ScalarField& result, const ScalarField& original) {
  require_same_shape(result, original, "d_tv_image");
  const double reference = total_variation(original);
  if (!(reference > 0.0)) throw MetricError("d_tv_image: original has zero total variation");
  ScalarField diff = result;
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= original[k];
  return total_variation(diff) / reference;
}

double d_l2_image(const ScalarField& result, const ScalarField& original) {
  require_same_shape(result, original, "d_l2_image");
  const double reference = norm(original);
  if (!(reference > 0.0)) throw MetricError("d_l2_image: original has zero norm");
  return distance(result, original) / reference;
}

Psnr psnr(const ScalarField& result, const ScalarField& original, double peak) {
  require_same_shape(result, original, "psnr");
  const double d = distance(result, original);
  const double mse = d * d / static_cast<double>(result.size());
  if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(peak * peak / mse), false};
}

double ssim(const ScalarField& a, const ScalarField& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (params.window <= 0 || !(params.gaussian_sigma > 0.0)) {
    throw std::invalid_argument("ssim: invalid window parameters");
  }
  const auto window = static_cast<std::size_t>(params.window);
  const std::size_t wi = a.rows() > 1 ? window : 1;
  const std::size_t wj = a.cols() > 1 ? window : 1;
  if (a.rows() < wi || a.cols() < wj) {
    throw MetricError("ssim: grid is smaller than the " + std::to_string(window) + " window");
  }
  const std::vector<double> unit{1.0};
  const std::vector<double> taps = gaussian_taps(params.window, params.gaussian_sigma);
  const std::vector<double>& taps_i = wi > 1 ? taps : unit;
  const std::vector<double>& taps_j = wj > 1 ? taps : unit;

  const std::size_t n = a.size();
  std::vector<double> x(a.values().begin(), a.values().end());
  std::vector<double> y(b.values().begin(), b.values().end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = x[k] * x[k];
    yy[k] = y[k] * y[k];
    xy[k] = x[k] * y[k];
  }
  const auto mu_x = filter_valid(x, a.rows(), a.cols(), taps_i, taps_j);
  const auto mu_y = filter_valid(y, a.rows(), a.cols(), taps_i, taps_j);
  const auto e_xx = filter_valid(xx, a.rows(), a.cols(), taps_i, taps_j);
  const auto e_yy = filter_valid(yy, a.rows(), a.cols(), taps_i, taps_j);
  const auto e_xy = filter_valid(xy, a.rows(), a.cols(), taps_i, taps_j);

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  double sum = 0.0;
  for (std::size_t k = 0; k < mu_x.size(); ++k) {
    const double mx2 = mu_x[k] * mu_x[k];
    const double my2 = mu_y[k] * mu_y[k];
    const double mxy = mu_x[k] * mu_y[k];
    const double vx = e_xx[k] - mx2;
    const double vy = e_yy[k] - my2;
    const double cxy = e_xy[k] - mxy;
    sum += ((2.0 * mxy + c1) * (2.0 * cxy + c2)) / ((mx2 + my2 + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mu_x.size());
}

MetricReport evaluate(const ScalarField& result, const ScalarField& original,
                      const ScalarField& noisy, const SsimParams& params) {
  MetricReport report;
  report.d_tv = d_tv_image(result, original);
  report.d_l2 = d_l2_image(result, original);
  report.psnr = psnr(result, original);
  report.ssim = ssim(result, original, params);
  report.d_l2_noisy = d_l2_image(result, noisy);
  return report;
}

}  // namespace dprof
