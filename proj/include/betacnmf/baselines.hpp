#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "betacnmf/cnmf.hpp"

namespace betacnmf {

enum class Method { proposed, smaragdis_biased, smaragdis_average, schmidt, wang };

inline constexpr std::array<Method, 5> kAllMethods = {
    Method::proposed, Method::smaragdis_biased, Method::smaragdis_average, Method::schmidt,
    Method::wang};

std::string_view to_string(Method method) noexcept;

/// Parses a CLI tag; the error message lists every valid tag.
Method parse_method(std::string_view tag);

// Per-lag building blocks shared by the prior-art schemes.

/// Single-slice form of the exact dictionary update for lag m.
NonnegMatrix update_W_single_lag(const NonnegMatrix& W_m, const NonnegMatrix& H,
                                 const NonnegMatrix& V, const NonnegMatrix& U, std::size_t m,
                                 Beta beta, double eps = kDefaultEps);

/// H o (W_m^T [V o U^(b-2)]<<m) / (W_m^T U^(b-1)), the denominator left
/// unshifted. At beta = 1 the denominator is W_m^T 1.
NonnegMatrix update_H_single_lag(const NonnegMatrix& W_m, const NonnegMatrix& H,
                                 const NonnegMatrix& V, const NonnegMatrix& U, std::size_t m,
                                 Beta beta, double eps = kDefaultEps);

/// Mean of update_H_single_lag over all lags.
NonnegMatrix update_H_average(const ConvDictionary& W, const NonnegMatrix& H,
                              const NonnegMatrix& V, const NonnegMatrix& U, Beta beta,
                              double eps = kDefaultEps);

/// Exact activation update except that at beta = 1 the denominator sums
/// W_m^T 1 without shifting the all-ones matrix.
NonnegMatrix update_H_schmidt(const ConvDictionary& W, const NonnegMatrix& H,
                              const NonnegMatrix& V, const NonnegMatrix& U, Beta beta,
                              double eps = kDefaultEps);

/// Sequential per-lag scheme: for each m, update W_m, then H with W_m alone.
double step_smaragdis_biased(FactorizationState& state, const NonnegMatrix& V);

/// All slices from H^t, then the lag-averaged activation update.
double step_smaragdis_average(FactorizationState& state, const NonnegMatrix& V);

double step_schmidt(FactorizationState& state, const NonnegMatrix& V,
                    HUpdateWeights weights = HUpdateWeights::updated);

/// Gauss-Seidel slice updates, each one seeing the reconstruction refreshed
/// after the previous slice, then the lag-averaged activation update.
double step_wang(FactorizationState& state, const NonnegMatrix& V);

double step(Method method, FactorizationState& state, const NonnegMatrix& V,
            HUpdateWeights weights = HUpdateWeights::updated);

/// fit_with dispatching on `method`; the trace carries the method tag.
FitResult fit(Method method, const NonnegMatrix& V, ConvDictionary W0, NonnegMatrix H0,
              Beta beta, const FitOptions& opts, double eps = kDefaultEps);

}  // namespace betacnmf
