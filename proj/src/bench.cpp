#include "betacnmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "betacnmf/errors.hpp"

namespace betacnmf {

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig c;
  c.K = 1000;
  c.I = 10;
  c.N = 100;
  c.M = 16;
  c.n_matrices = 100;
  c.n_inits = 10;
  c.max_iters = 1000;
  return c;
}

void ExperimentConfig::validate() const {
  if (K == 0 || I == 0 || N == 0 || M == 0) throw ValidationError("K, I, N, M must be >= 1");
  if (n_matrices == 0 || n_inits == 0) throw ValidationError("n_matrices and n_inits must be >= 1");
  if (max_iters == 0) throw ValidationError("max_iters must be >= 1");
  if (methods.empty()) throw ValidationError("at least one method is required");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  Beta{beta};
}

ConvDictionary gen_dictionary(std::size_t K, std::size_t I, std::size_t M, Rng& rng) {
  std::vector<NonnegMatrix> slices;
  slices.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> data(K * I);
    for (double& w : data) {
      const double g1 = rng.normal();
      const double g2 = rng.normal();
      w = g1 * g1 + g2 * g2;
    }
    slices.emplace_back(K, I, std::move(data));
  }
  return ConvDictionary(std::move(slices));
}

NonnegMatrix gen_activations(std::size_t I, std::size_t N, Rng& rng) {
  std::vector<double> data(I * N);
  for (double& h : data) h = rng.uniform();
  return NonnegMatrix(I, N, std::move(data));
}

SyntheticData gen_V(const ExperimentConfig& config, std::size_t matrix_index) {
  if (matrix_index >= config.n_matrices) throw ValidationError("matrix index out of range");
  Rng rng(derive_seed(config.master_seed, "data", matrix_index));
  ConvDictionary W = gen_dictionary(config.K, config.I, config.M, rng);
  NonnegMatrix H = gen_activations(config.I, config.N, rng);
  NonnegMatrix V = reconstruct(W, H);
  return {std::move(V), std::move(W), std::move(H)};
}

InitFactors gen_init(const ExperimentConfig& config, std::uint64_t run_id) {
  Rng rng(derive_seed(config.master_seed, "init", run_id));
  auto draw = [&rng](std::size_t rows, std::size_t cols) {
    std::vector<double> data(rows * cols);
    for (double& x : data) x = 0.1 + rng.uniform();
    return NonnegMatrix(rows, cols, std::move(data));
  };
  std::vector<NonnegMatrix> slices;
  for (std::size_t m = 0; m < config.M; ++m) slices.push_back(draw(config.K, config.I));
  NonnegMatrix H = draw(config.I, config.N);
  return {ConvDictionary(std::move(slices)), std::move(H)};
}

std::vector<LossTrace> run_ensemble(const ExperimentConfig& config,
                                    const EnsembleOptions& options) {
  config.validate();
  const Beta beta(config.beta);
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_runs = config.n_matrices * config.n_inits;
  std::vector<LossTrace> traces(n_runs * n_methods);

  FitOptions fit_opts;
  fit_opts.max_iters = config.max_iters;
  fit_opts.record_time = options.timing;
  fit_opts.h_weights = config.h_weights;
  fit_opts.throw_on_failure = false;

  // One work item per data matrix, so V is generated once per matrix.
  auto run_matrix = [&](std::size_t matrix_index) {
    const SyntheticData data = gen_V(config, matrix_index);
    for (std::size_t init = 0; init < config.n_inits; ++init) {
      const std::uint64_t run_id = matrix_index * config.n_inits + init;
      const InitFactors start = gen_init(config, run_id);
      for (std::size_t j = 0; j < n_methods; ++j) {
        LossTrace& slot = traces[run_id * n_methods + j];
        try {
          slot = fit(config.methods[j], data.V, start.W, start.H, beta, fit_opts, config.eps)
                     .trace;
        } catch (const std::exception& e) {
          slot.method = std::string(to_string(config.methods[j]));
          slot.beta = config.beta;
          slot.failure = e.what();
        }
        slot.run_id = run_id;
      }
    }
  };

  const std::size_t jobs = options.timing ? 1 : std::max<std::size_t>(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < config.n_matrices; ++i) run_matrix(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < std::min(jobs, config.n_matrices); ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < config.n_matrices; i = next++) run_matrix(i);
      });
    }
  }
  return traces;
}

std::vector<StatsRow> ensemble_stats(const std::vector<LossTrace>& traces,
                                     const std::string& method) {
  struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::map<std::size_t, Welford> acc;
  double beta = 0.0;
  for (const auto& trace : traces) {
    if (trace.method != method) continue;
    beta = trace.beta;
    for (const auto& rec : trace.records) {
      Welford& w = acc[rec.iteration];
      ++w.n;
      const double delta = rec.loss - w.mean;
      w.mean += delta / static_cast<double>(w.n);
      w.m2 += delta * (rec.loss - w.mean);
    }
  }
  std::vector<StatsRow> rows;
  rows.reserve(acc.size());
  for (const auto& [iteration, w] : acc) {
    const double var = w.n > 1 ? w.m2 / static_cast<double>(w.n - 1) : 0.0;
    rows.push_back({method, beta, iteration, w.mean, std::sqrt(std::max(var, 0.0)), w.n});
  }
  return rows;
}

std::vector<double> losses_at(const std::vector<LossTrace>& traces, const std::string& method,
                              std::size_t iteration) {
  std::vector<double> out;
  for (const auto& trace : traces) {
    if (trace.method != method) continue;
    for (const auto& rec : trace.records) {
      if (rec.iteration == iteration) {
        out.push_back(rec.loss);
        break;
      }
    }
  }
  return out;
}

std::vector<WelchRow> welch_by_iteration(const std::vector<LossTrace>& traces,
                                         const std::string& method_a,
                                         const std::string& method_b) {
  std::size_t last = 0;
  for (const auto& trace : traces) {
    if (!trace.records.empty()) last = std::max(last, trace.records.back().iteration);
  }
  std::vector<WelchRow> rows;
  for (std::size_t it = 0; it <= last; ++it) {
    const auto a = losses_at(traces, method_a, it);
    const auto b = losses_at(traces, method_b, it);
    if (a.size() < 2 || b.size() < 2) continue;
    rows.push_back({it, method_a, method_b, welch_t_test(a, b)});
  }
  return rows;
}

std::vector<RuntimeRow> runtime_rows(const std::vector<LossTrace>& traces, double beta,
                                     const std::vector<Method>& methods) {
  std::map<std::string, std::pair<double, std::size_t>> totals;
  for (const auto& trace : traces) {
    if (trace.failure || trace.records.empty()) continue;
    auto& [total, count] = totals[trace.method];
    total += static_cast<double>(trace.records.back().elapsed_ns);
    ++count;
  }
  auto mean_of = [&](const std::string& method) {
    const auto it = totals.find(method);
    if (it == totals.end() || it->second.second == 0) return std::nan("");
    return it->second.first / static_cast<double>(it->second.second);
  };
  const double reference = mean_of("proposed");
  std::vector<RuntimeRow> rows;
  for (Method m : methods) {
    const std::string tag(to_string(m));
    const double mean = mean_of(tag);
    rows.push_back({tag, beta, mean, mean / reference});
  }
  return rows;
}

std::vector<RuntimeRow> relative_runtime(ExperimentConfig config,
                                         const std::vector<double>& betas) {
  if (std::find(config.methods.begin(), config.methods.end(), Method::proposed) ==
      config.methods.end()) {
    config.methods.insert(config.methods.begin(), Method::proposed);
  }
  std::vector<RuntimeRow> rows;
  for (double beta : betas) {
    config.beta = beta;
    const auto traces = run_ensemble(config, {.jobs = 1, .timing = true});
    auto part = runtime_rows(traces, beta, config.methods);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace betacnmf
