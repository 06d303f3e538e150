#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dprof/grid.hpp"
#include "dprof/metrics.hpp"
#include "dprof/solver.hpp"
#include "dprof/weights.hpp"

namespace dprof {

enum class Model { kRof, kHuber, kDpAdaptive, kDpNoisy };

Model parse_model(const std::string& name);
const char* to_string(Model model);

struct ModelConfig {
  Model model = Model::kRof;
  double lambda = 0.24;
  /// Huber only.
  std::optional<double> alpha;
  /// Double-phase models only.
  std::optional<WeightSpec> weight;
  /// Lambda of the ROF pre-solve (dp-adaptive); defaults to lambda.
  std::optional<double> pre_lambda;
  MollifyOrder order = MollifyOrder::kMollifyThenDifferentiate;
  SolverConfig solver;

  /// Parameter presence must match the model.
  void validate() const;
};

struct RunResult {
  ScalarField u;
  /// Double-phase models.
  std::optional<ScalarField> weight;
  std::optional<ScalarField> u_rof;
  /// ROF pre-solve of dp-adaptive; zero otherwise.
  int pre_iterations = 0;
  bool pre_converged = true;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;

  bool all_converged() const { return converged && pre_converged; }
};

RunResult run_model(const ScalarField& g, const ModelConfig& cfg);

/// Noise seed of the sigma_index-th noise level; shared across models and lambdas.
std::uint64_t derive_noise_seed(std::uint64_t base_seed, std::size_t sigma_index);

struct SweepRow {
  Model model = Model::kRof;
  double lambda = 0.0;
  double sigma = 0.0;
  std::optional<double> alpha;
  std::optional<WeightSpec> weight;
  MetricReport metrics;
  int iterations = 0;
  int pre_iterations = 0;
  bool converged = false;
};

struct SweepConfig {
  /// One entry per model; lambda is overwritten per cell.
  std::vector<ModelConfig> models;
  std::vector<double> lambdas;
  std::vector<double> sigmas;
  std::uint64_t seed = 0;
  SsimParams ssim;
};

/// "model,lambda,sigma,alpha,a,b,r,d_l2_noisy,d_tv,d_l2,psnr,ssim,iterations,pre_iterations,converged"
std::string sweep_csv_header();
std::string to_csv(const SweepRow& row);

/// Cells ordered by (sigma, model, lambda). When csv is set, the header and each
/// row are written and flushed as soon as the cell finishes.
std::vector<SweepRow> run_sweep(const ScalarField& original, const SweepConfig& cfg,
                                std::ostream* csv = nullptr);

struct SweepExtremum {
  Model model = Model::kRof;
  double sigma = 0.0;
  std::string metric;
  double lambda = 0.0;
  double value = 0.0;
};

/// Per (sigma, model): lambda minimizing d_tv and d_l2 and maximizing psnr and ssim.
std::vector<SweepExtremum> sweep_extrema(const std::vector<SweepRow>& rows);

}  // namespace dprof
