#include "betacnmf/baselines.hpp"

#include "betacnmf/errors.hpp"

namespace betacnmf {

namespace {

NonnegMatrix weighted_ratio(const NonnegMatrix& V, const NonnegMatrix& U, Beta beta,
                            double eps) {
  return hadamard(V, entrywise_pow(U, beta.value() - 2.0, eps));
}

void check_slice(const NonnegMatrix& W_m, const NonnegMatrix& H, const NonnegMatrix& V,
                 const NonnegMatrix& U) {
  if (W_m.cols() != H.rows() || V.rows() != W_m.rows() || V.cols() != H.cols() ||
      !U.same_shape(V)) {
    throw DimensionError("per-lag update: inconsistent shapes");
  }
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::proposed: return "proposed";
    case Method::smaragdis_biased: return "smaragdis_biased";
    case Method::smaragdis_average: return "smaragdis_average";
    case Method::schmidt: return "schmidt";
    case Method::wang: return "wang";
  }
  return "unknown";
}

Method parse_method(std::string_view tag) {
  std::string valid;
  for (Method m : kAllMethods) {
    if (to_string(m) == tag) return m;
    if (!valid.empty()) valid += ", ";
    valid += to_string(m);
  }
  throw ValidationError("unknown method '" + std::string(tag) + "' (valid: " + valid + ")");
}

NonnegMatrix update_W_single_lag(const NonnegMatrix& W_m, const NonnegMatrix& H,
                                 const NonnegMatrix& V, const NonnegMatrix& U, std::size_t m,
                                 Beta beta, double eps) {
  check_slice(W_m, H, V, U);
  const NonnegMatrix shifted = right_shift(H, m);
  const NonnegMatrix numer = multiply_abt(weighted_ratio(V, U, beta, eps), shifted);
  const NonnegMatrix denom = multiply_abt(entrywise_pow(U, beta.value() - 1.0, eps), shifted);
  return hadamard(W_m, safe_divide(numer, denom, eps));
}

NonnegMatrix update_H_single_lag(const NonnegMatrix& W_m, const NonnegMatrix& H,
                                 const NonnegMatrix& V, const NonnegMatrix& U, std::size_t m,
                                 Beta beta, double eps) {
  check_slice(W_m, H, V, U);
  const NonnegMatrix numer = multiply_atb(W_m, left_shift(weighted_ratio(V, U, beta, eps), m));
  const NonnegMatrix denom = multiply_atb(W_m, entrywise_pow(U, beta.value() - 1.0, eps));
  return hadamard(H, safe_divide(numer, denom, eps));
}

NonnegMatrix update_H_average(const ConvDictionary& W, const NonnegMatrix& H,
                              const NonnegMatrix& V, const NonnegMatrix& U, Beta beta,
                              double eps) {
  NonnegMatrix total(H.rows(), H.cols());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    total = add(total, update_H_single_lag(W[m], H, V, U, m, beta, eps));
  }
  return scale(total, 1.0 / static_cast<double>(W.lags()));
}

NonnegMatrix update_H_schmidt(const ConvDictionary& W, const NonnegMatrix& H,
                              const NonnegMatrix& V, const NonnegMatrix& U, Beta beta,
                              double eps) {
  if (!beta.is_kullback_leibler()) return update_H(W, H, V, U, beta, eps);
  if (W.lags() == 0 || W[0].cols() != H.rows()) throw DimensionError("schmidt: shapes");
  const NonnegMatrix weighted = weighted_ratio(V, U, beta, eps);
  const NonnegMatrix ones(U.rows(), U.cols(), 1.0);
  NonnegMatrix numer(H.rows(), H.cols());
  NonnegMatrix denom(H.rows(), H.cols());
  for (std::size_t m = 0; m < W.lags(); ++m) {
    check_slice(W[m], H, V, U);
    numer = add(numer, multiply_atb(W[m], left_shift(weighted, m)));
    denom = add(denom, multiply_atb(W[m], ones));
  }
  return hadamard(H, safe_divide(numer, denom, eps));
}

double step_smaragdis_biased(FactorizationState& state, const NonnegMatrix& V) {
  for (std::size_t m = 0; m < state.W.lags(); ++m) {
    NonnegMatrix next = update_W_single_lag(state.W[m], state.H, V, state.U, m, state.beta,
                                            state.eps);
    state.U = refresh_U_incremental(state.U, state.W[m], next, state.H, m);
    state.W.set(m, std::move(next));
    state.H = update_H_single_lag(state.W[m], state.H, V, state.U, m, state.beta, state.eps);
    state.U = reconstruct(state.W, state.H);
  }
  ++state.t;
  return divergence(V, state.U, state.beta, state.eps);
}

double step_smaragdis_average(FactorizationState& state, const NonnegMatrix& V) {
  ConvDictionary next_W = update_W(state.W, state.H, V, state.U, state.beta, state.eps);
  NonnegMatrix U_tilde = state.U;
  for (std::size_t m = 0; m < next_W.lags(); ++m) {
    U_tilde = refresh_U_incremental(U_tilde, state.W[m], next_W[m], state.H, m);
  }
  state.H = update_H_average(next_W, state.H, V, U_tilde, state.beta, state.eps);
  state.W = std::move(next_W);
  state.U = reconstruct(state.W, state.H);
  ++state.t;
  return divergence(V, state.U, state.beta, state.eps);
}

double step_schmidt(FactorizationState& state, const NonnegMatrix& V, HUpdateWeights weights) {
  ConvDictionary next_W = update_W(state.W, state.H, V, state.U, state.beta, state.eps);
  NonnegMatrix U_tilde = state.U;
  for (std::size_t m = 0; m < next_W.lags(); ++m) {
    U_tilde = refresh_U_incremental(U_tilde, state.W[m], next_W[m], state.H, m);
  }
  const ConvDictionary& h_weights = weights == HUpdateWeights::updated ? next_W : state.W;
  NonnegMatrix next_H = update_H_schmidt(h_weights, state.H, V, U_tilde, state.beta, state.eps);
  state.W = std::move(next_W);
  state.H = std::move(next_H);
  state.U = reconstruct(state.W, state.H);
  ++state.t;
  return divergence(V, state.U, state.beta, state.eps);
}

double step_wang(FactorizationState& state, const NonnegMatrix& V) {
  for (std::size_t m = 0; m < state.W.lags(); ++m) {
    NonnegMatrix next = update_W_single_lag(state.W[m], state.H, V, state.U, m, state.beta,
                                            state.eps);
    state.U = refresh_U_incremental(state.U, state.W[m], next, state.H, m);
    state.W.set(m, std::move(next));
  }
  state.H = update_H_average(state.W, state.H, V, state.U, state.beta, state.eps);
  state.U = reconstruct(state.W, state.H);
  ++state.t;
  return divergence(V, state.U, state.beta, state.eps);
}

double step(Method method, FactorizationState& state, const NonnegMatrix& V,
            HUpdateWeights weights) {
  switch (method) {
    case Method::proposed: return step_proposed(state, V, weights);
    case Method::smaragdis_biased: return step_smaragdis_biased(state, V);
    case Method::smaragdis_average: return step_smaragdis_average(state, V);
    case Method::schmidt: return step_schmidt(state, V, weights);
    case Method::wang: return step_wang(state, V);
  }
  throw ValidationError("unknown method");
}

FitResult fit(Method method, const NonnegMatrix& V, ConvDictionary W0, NonnegMatrix H0,
              Beta beta, const FitOptions& opts, double eps) {
  const HUpdateWeights weights = opts.h_weights;
  FitResult result = fit_with(
      [method, weights](FactorizationState& s, const NonnegMatrix& v) {
        return step(method, s, v, weights);
      },
      V, std::move(W0), std::move(H0), beta, opts, eps);
  result.trace.method = std::string(to_string(method));
  return result;
}

}  // namespace betacnmf
