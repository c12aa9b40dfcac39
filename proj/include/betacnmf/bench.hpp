#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "betacnmf/baselines.hpp"
#include "betacnmf/cnmf.hpp"
#include "betacnmf/rng.hpp"
#include "betacnmf/stats.hpp"

namespace betacnmf {

/// One ensemble experiment at a single beta. Defaults are the desk-scale
/// layout; full_scale() gives the full-size one.
struct ExperimentConfig {
  std::size_t K = 100;
  std::size_t I = 5;
  std::size_t N = 50;
  std::size_t M = 4;
  double beta = 1.0;
  std::size_t n_matrices = 10;
  std::size_t n_inits = 3;
  std::size_t max_iters = 200;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::uint64_t master_seed = 1;
  double eps = kDefaultEps;
  HUpdateWeights h_weights = HUpdateWeights::updated;

  static ExperimentConfig desk_scale() { return {}; }
  static ExperimentConfig full_scale();

  /// Throws ValidationError when a count is zero or eps is not positive.
  void validate() const;
};

/// Lag slices with chi-squared (2 dof) entries: sum of two squared normals.
ConvDictionary gen_dictionary(std::size_t K, std::size_t I, std::size_t M, Rng& rng);

/// I x N activations, entries uniform on [0, 1).
NonnegMatrix gen_activations(std::size_t I, std::size_t N, Rng& rng);

struct SyntheticData {
  NonnegMatrix V;
  ConvDictionary W;
  NonnegMatrix H;
};

/// Exactly factorizable data matrix number `matrix_index` of the experiment.
SyntheticData gen_V(const ExperimentConfig& config, std::size_t matrix_index);

struct InitFactors {
  ConvDictionary W;
  NonnegMatrix H;
};

/// Starting factors for a run, entries uniform on [0.1, 1.1).
InitFactors gen_init(const ExperimentConfig& config, std::uint64_t run_id);

struct EnsembleOptions {
  std::size_t jobs = 1;
  /// Record wall time. Forces serial execution; elapsed_ns is 0 otherwise.
  bool timing = false;
};

/// Every (matrix, init, method) fit. run_id = matrix_index * n_inits + init_index;
/// all methods of a run start from the same factors. Output is ordered by
/// run_id, then by the order of config.methods, whatever the job count.
std::vector<LossTrace> run_ensemble(const ExperimentConfig& config,
                                    const EnsembleOptions& options = {});

struct StatsRow {
  std::string method;
  double beta = 0.0;
  std::size_t iteration = 0;
  double mean_loss = 0.0;
  double std_loss = 0.0;
  std::size_t n = 0;
};

/// Mean and sample standard deviation of the loss per (method, iteration),
/// accumulated in one streaming pass.
std::vector<StatsRow> ensemble_stats(const std::vector<LossTrace>& traces,
                                     const std::string& method);

/// Loss of every run of `method` at `iteration`, in trace order.
std::vector<double> losses_at(const std::vector<LossTrace>& traces, const std::string& method,
                              std::size_t iteration);

struct WelchRow {
  std::size_t iteration = 0;
  std::string method_a;
  std::string method_b;
  WelchResult result;
};

/// Welch test of method_a against method_b at every iteration both reach.
std::vector<WelchRow> welch_by_iteration(const std::vector<LossTrace>& traces,
                                         const std::string& method_a,
                                         const std::string& method_b);

struct RuntimeRow {
  std::string method;
  double beta = 0.0;
  double mean_ns = 0.0;
  double ratio = 1.0;
};

/// Mean wall time of each method's fits in `traces` relative to "proposed".
/// Failed runs are skipped; the ratio is NaN when proposed has no timed run.
std::vector<RuntimeRow> runtime_rows(const std::vector<LossTrace>& traces, double beta,
                                     const std::vector<Method>& methods);

/// Mean wall time per full fit of each method over `betas`, divided by that
/// of the proposed updates at the same beta. Runs serially with timing on.
std::vector<RuntimeRow> relative_runtime(ExperimentConfig config,
                                         const std::vector<double>& betas);

}  // namespace betacnmf
