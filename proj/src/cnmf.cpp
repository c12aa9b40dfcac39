#include "betacnmf/cnmf.hpp"

#include <chrono>
#include <cmath>

#include "betacnmf/errors.hpp"

namespace betacnmf {

namespace {

void check_factors(const ConvDictionary& W, const NonnegMatrix& H) {
  if (W.lags() == 0) throw DimensionError("dictionary has no lag slices");
  if (W.rank() != H.rows()) {
    throw DimensionError("dictionary rank " + std::to_string(W.rank()) +
                         " does not match activation rows " + std::to_string(H.rows()));
  }
}

void check_model(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                 const NonnegMatrix& U) {
  check_factors(W, H);
  if (V.rows() != W.rows() || V.cols() != H.cols()) {
    throw DimensionError("data matrix is " + std::to_string(V.rows()) + "x" +
                         std::to_string(V.cols()) + ", model expects " +
                         std::to_string(W.rows()) + "x" + std::to_string(H.cols()));
  }
  if (!U.same_shape(V)) throw DimensionError("reconstruction shape differs from data");
}

// V o U^(b-2) and U^(b-1): the two ingredients of every update.
struct Ratios {
  NonnegMatrix weighted;
  NonnegMatrix power;
};

Ratios ratios(const NonnegMatrix& V, const NonnegMatrix& U, Beta beta, double eps) {
  const double b = beta.value();
  return {hadamard(V, entrywise_pow(U, b - 2.0, eps)), entrywise_pow(U, b - 1.0, eps)};
}

bool strictly_positive(const NonnegMatrix& a) {
  for (double v : a.values()) {
    if (!(v > 0.0)) return false;
  }
  return true;
}

}  // namespace

ConvDictionary::ConvDictionary(std::vector<NonnegMatrix> slices) : slices_(std::move(slices)) {
  if (slices_.empty()) throw ValidationError("dictionary needs at least one lag slice");
  for (const auto& s : slices_) {
    if (!s.same_shape(slices_.front())) {
      throw DimensionError("dictionary slices must share one shape");
    }
  }
}

void ConvDictionary::set(std::size_t m, NonnegMatrix slice) {
  if (m >= slices_.size()) throw DimensionError("lag index out of range");
  if (!slice.same_shape(slices_[m])) throw DimensionError("replacement slice changes shape");
  slices_[m] = std::move(slice);
}

std::string to_string(HUpdateWeights w) {
  return w == HUpdateWeights::updated ? "new" : "old";
}

HUpdateWeights parse_h_update_weights(const std::string& text) {
  if (text == "new") return HUpdateWeights::updated;
  if (text == "old") return HUpdateWeights::previous;
  throw ValidationError("h_update_weights must be 'new' or 'old', got '" + text + "'");
}

FactorizationState make_state(ConvDictionary W, NonnegMatrix H, Beta beta, double eps) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  NonnegMatrix U = reconstruct(W, H);
  return FactorizationState{std::move(W), std::move(H), std::move(U), beta, eps, 0};
}

NonnegMatrix reconstruct(const ConvDictionary& W, const NonnegMatrix& H) {
  check_factors(W, H);
  const std::size_t K = W.rows();
  const std::size_t N = H.cols();
  std::vector<double> out(K * N, 0.0);
  // Dense loops throughout: run time must not depend on how sparse the factors get.
  for (std::size_t m = 0; m < W.lags() && m < N; ++m) {
    const NonnegMatrix& Wm = W[m];
    for (std::size_t k = 0; k < K; ++k) {
      double* dst = out.data() + k * N;
      for (std::size_t i = 0; i < W.rank(); ++i) {
        const double w = Wm(k, i);
        auto h = H.row(i);
        for (std::size_t n = m; n < N; ++n) dst[n] += w * h[n - m];
      }
    }
  }
  return NonnegMatrix::unchecked(K, N, std::move(out));
}

ConvDictionary update_W(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                        const NonnegMatrix& U, Beta beta, double eps) {
  check_model(W, H, V, U);
  const Ratios r = ratios(V, U, beta, eps);
  std::vector<NonnegMatrix> next;
  next.reserve(W.lags());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    const NonnegMatrix shifted = right_shift(H, m);
    const NonnegMatrix numer = multiply_abt(r.weighted, shifted);
    const NonnegMatrix denom = multiply_abt(r.power, shifted);
    next.push_back(hadamard(W[m], safe_divide(numer, denom, eps)));
  }
  return ConvDictionary(std::move(next));
}

NonnegMatrix update_H(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                      const NonnegMatrix& U, Beta beta, double eps) {
  check_model(W, H, V, U);
  const Ratios r = ratios(V, U, beta, eps);
  NonnegMatrix numer(H.rows(), H.cols());
  NonnegMatrix denom(H.rows(), H.cols());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    numer = add(numer, multiply_atb(W[m], left_shift(r.weighted, m)));
    denom = add(denom, multiply_atb(W[m], left_shift(r.power, m)));
  }
  return hadamard(H, safe_divide(numer, denom, eps));
}

NonnegMatrix refresh_U_incremental(const NonnegMatrix& U, const NonnegMatrix& W_old_m,
                                   const NonnegMatrix& W_new_m, const NonnegMatrix& H,
                                   std::size_t m) {
  if (!W_old_m.same_shape(W_new_m)) throw DimensionError("refresh: slice shapes differ");
  if (W_old_m.cols() != H.rows() || U.rows() != W_old_m.rows() || U.cols() != H.cols()) {
    throw DimensionError("refresh: inconsistent shapes");
  }
  const std::size_t N = U.cols();
  std::vector<double> out(U.values().begin(), U.values().end());
  for (std::size_t k = 0; k < U.rows(); ++k) {
    double* dst = out.data() + k * N;
    for (std::size_t i = 0; i < H.rows(); ++i) {
      const double delta = W_new_m(k, i) - W_old_m(k, i);
      auto h = H.row(i);
      for (std::size_t n = m; n < N; ++n) dst[n] += delta * h[n - m];
    }
  }
  for (double& v : out) {
    if (v < 0.0) v = 0.0;
  }
  return NonnegMatrix::unchecked(U.rows(), N, std::move(out));
}

std::vector<GradientParts> gradient_W(const ConvDictionary& W, const NonnegMatrix& H,
                                      const NonnegMatrix& V, Beta beta, double eps) {
  const NonnegMatrix U = reconstruct(W, H);
  check_model(W, H, V, U);
  const Ratios r = ratios(V, U, beta, eps);
  std::vector<GradientParts> parts;
  parts.reserve(W.lags());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    const NonnegMatrix shifted = right_shift(H, m);
    parts.push_back({multiply_abt(r.power, shifted), multiply_abt(r.weighted, shifted)});
  }
  return parts;
}

GradientParts gradient_H(const ConvDictionary& W, const NonnegMatrix& H, const NonnegMatrix& V,
                         Beta beta, double eps) {
  const NonnegMatrix U = reconstruct(W, H);
  check_model(W, H, V, U);
  const Ratios r = ratios(V, U, beta, eps);
  NonnegMatrix positive(H.rows(), H.cols());
  NonnegMatrix negative(H.rows(), H.cols());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    positive = add(positive, multiply_atb(W[m], left_shift(r.power, m)));
    negative = add(negative, multiply_atb(W[m], left_shift(r.weighted, m)));
  }
  return {std::move(positive), std::move(negative)};
}

double step_proposed(FactorizationState& state, const NonnegMatrix& V, HUpdateWeights weights) {
  ConvDictionary next_W = update_W(state.W, state.H, V, state.U, state.beta, state.eps);

  NonnegMatrix U_tilde = state.U;
  for (std::size_t m = 0; m < next_W.lags(); ++m) {
    U_tilde = refresh_U_incremental(U_tilde, state.W[m], next_W[m], state.H, m);
  }

  const ConvDictionary& h_weights = weights == HUpdateWeights::updated ? next_W : state.W;
  NonnegMatrix next_H = update_H(h_weights, state.H, V, U_tilde, state.beta, state.eps);

  state.W = std::move(next_W);
  state.H = std::move(next_H);
  state.U = reconstruct(state.W, state.H);
  ++state.t;
  return divergence(V, state.U, state.beta, state.eps);
}

FitResult fit_with(const StepFunction& step, const NonnegMatrix& V, ConvDictionary W0,
                   NonnegMatrix H0, Beta beta, const FitOptions& opts, double eps) {
  if (opts.max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (opts.rel_tol && !(*opts.rel_tol > 0.0)) throw ValidationError("rel_tol must be positive");
  for (const auto& slice : W0.slices()) {
    if (!strictly_positive(slice)) throw ValidationError("initial dictionary must be positive");
  }
  if (!strictly_positive(H0)) throw ValidationError("initial activations must be positive");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] {
    if (!opts.record_time) return std::int64_t{0};
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count());
  };

  FitResult result{make_state(std::move(W0), std::move(H0), beta, eps), {}, 0};
  check_model(result.state.W, result.state.H, V, result.state.U);
  result.trace.beta = beta.value();

  double loss = divergence(V, result.state.U, beta, eps);
  if (!std::isfinite(loss)) throw NumericalError(0, "initial loss is not finite");
  if (opts.record_trace) result.trace.records.push_back({0, loss, elapsed()});

  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    const double next = step(result.state, V);
    if (!std::isfinite(next)) {
      NumericalError err(it, "loss is not finite");
      if (opts.throw_on_failure) throw err;
      result.trace.failure = err.what();
      break;
    }
    if (opts.record_trace) result.trace.records.push_back({it, next, elapsed()});
    result.iterations = it;
    const double change = std::abs(loss - next) / std::max(loss, eps);
    loss = next;
    if (opts.rel_tol && change < *opts.rel_tol) break;
  }
  return result;
}

FitResult fit(const NonnegMatrix& V, ConvDictionary W0, NonnegMatrix H0, Beta beta,
              const FitOptions& opts, double eps) {
  const HUpdateWeights weights = opts.h_weights;
  FitResult result = fit_with(
      [weights](FactorizationState& s, const NonnegMatrix& v) {
        return step_proposed(s, v, weights);
      },
      V, std::move(W0), std::move(H0), beta, opts, eps);
  result.trace.method = "proposed";
  return result;
}

}  // namespace betacnmf
