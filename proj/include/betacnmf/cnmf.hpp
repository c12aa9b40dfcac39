#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "betacnmf/betadiv.hpp"
#include "betacnmf/nnmat.hpp"

namespace betacnmf {

/// Ordered lag slices W_0 .. W_{M-1} of a convolutional dictionary, all K x I.
class ConvDictionary {
 public:
  ConvDictionary() = default;
  explicit ConvDictionary(std::vector<NonnegMatrix> slices);

  std::size_t lags() const noexcept { return slices_.size(); }
  std::size_t rows() const noexcept { return slices_.empty() ? 0 : slices_.front().rows(); }
  std::size_t rank() const noexcept { return slices_.empty() ? 0 : slices_.front().cols(); }

  const NonnegMatrix& operator[](std::size_t m) const { return slices_[m]; }
  const std::vector<NonnegMatrix>& slices() const noexcept { return slices_; }

  /// Replaces slice m; the new slice must keep the K x I shape.
  void set(std::size_t m, NonnegMatrix slice);

  friend bool operator==(const ConvDictionary&, const ConvDictionary&) = default;

 private:
  std::vector<NonnegMatrix> slices_;
};

/// Which dictionary multiplies the activation update: the freshly updated
/// one (default) or the one the iteration started from.
enum class HUpdateWeights { updated, previous };

std::string to_string(HUpdateWeights w);
HUpdateWeights parse_h_update_weights(const std::string& text);

/// One optimizer's mutable state. `U` always caches reconstruct(W, H).
struct FactorizationState {
  ConvDictionary W;
  NonnegMatrix H;
  NonnegMatrix U;
  Beta beta{1.0};
  double eps = kDefaultEps;
  std::size_t t = 0;
};

/// Builds a state from factors and fills in the cached reconstruction.
FactorizationState make_state(ConvDictionary W, NonnegMatrix H, Beta beta,
                              double eps = kDefaultEps);

/// U = sum_m W_m * right_shift(H, m)
NonnegMatrix reconstruct(const ConvDictionary& W, const NonnegMatrix& H);

/// Simultaneous multiplicative update of every lag slice from one U.
ConvDictionary update_W(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                        const NonnegMatrix& U, Beta beta, double eps = kDefaultEps);

/// Exact activation update over all lags. Powers of U are taken before the
/// left shift, so vacated columns drop out of both sums.
NonnegMatrix update_H(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                      const NonnegMatrix& U, Beta beta, double eps = kDefaultEps);

/// U + (W_new_m - W_old_m) * right_shift(H, m), with rounding negatives set to 0.
NonnegMatrix refresh_U_incremental(const NonnegMatrix& U, const NonnegMatrix& W_old_m,
                                   const NonnegMatrix& W_new_m, const NonnegMatrix& H,
                                   std::size_t m);

/// Gradient of the loss split as positive - negative. The multiplicative
/// factor of each update is negative / positive.
struct GradientParts {
  NonnegMatrix positive;
  NonnegMatrix negative;
};

/// dD/dW_m for every lag m, as (U^(b-1) H_m^T) - ((V o U^(b-2)) H_m^T).
std::vector<GradientParts> gradient_W(const ConvDictionary& W, const NonnegMatrix& H,
                                      const NonnegMatrix& V, Beta beta,
                                      double eps = kDefaultEps);

/// dD/dH, summing each lag's contribution over the aligned columns.
GradientParts gradient_H(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                         Beta beta, double eps = kDefaultEps);

/// One alternating iteration of the exact updates. Returns the loss after it.
double step_proposed(FactorizationState& state, const NonnegMatrix& V,
                     HUpdateWeights weights = HUpdateWeights::updated);

struct FitOptions {
  std::size_t max_iters = 1000;
  std::optional<double> rel_tol;
  bool record_trace = true;
  bool record_time = true;
  HUpdateWeights h_weights = HUpdateWeights::updated;
  /// When false, a non-finite loss ends the run and is noted in
  /// LossTrace::failure instead of throwing.
  bool throw_on_failure = true;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double loss = 0.0;
  std::int64_t elapsed_ns = 0;
};

/// Loss per iteration for one fit. Record 0 is the initial loss.
struct LossTrace {
  std::string method;
  double beta = 0.0;
  std::uint64_t run_id = 0;
  std::vector<TraceRecord> records;
  /// Set when the run stopped on a numerical failure.
  std::optional<std::string> failure;
};

struct FitResult {
  FactorizationState state;
  LossTrace trace;
  std::size_t iterations = 0;
};

using StepFunction = std::function<double(FactorizationState&, const NonnegMatrix&)>;

/// Runs `step` until max_iters or until the relative loss change drops below
/// rel_tol. Throws ValidationError for non-positive inits and NumericalError
/// when the loss stops being finite.
FitResult fit_with(const StepFunction& step, const NonnegMatrix& V, ConvDictionary W0,
                   NonnegMatrix H0, Beta beta, const FitOptions& opts,
                   double eps = kDefaultEps);

/// fit_with using step_proposed.
FitResult fit(const NonnegMatrix& V, ConvDictionary W0, NonnegMatrix H0, Beta beta,
              const FitOptions& opts, double eps = kDefaultEps);

}  // namespace betacnmf
