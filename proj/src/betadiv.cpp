#include "betacnmf/betadiv.hpp"

#include <algorithm>
#include <cmath>

#include "betacnmf/errors.hpp"

namespace betacnmf {

Beta::Beta(double value) : value_(value) {
  if (!std::isfinite(value)) throw ValidationError("beta must be finite");
}

double divergence(double p, double q, Beta beta, double eps) {
  q = std::max(q, eps);
  if (beta.is_itakura_saito()) {
    const double ratio = std::max(p, eps) / q;
    return ratio - std::log(ratio) - 1.0;
  }
  if (beta.is_kullback_leibler()) {
    return p * std::log(std::max(p, eps) / q) - p + q;
  }
  const double b = beta.value();
  return (std::pow(p, b) + (b - 1.0) * std::pow(q, b) - b * p * std::pow(q, b - 1.0)) /
         (b * (b - 1.0));
}

double divergence(const NonnegMatrix& v, const NonnegMatrix& u, Beta beta, double eps) {
  if (!v.same_shape(u)) throw DimensionError("divergence: shape mismatch");
  auto vv = v.values();
  auto uv = u.values();
  double total = 0.0;
  if (beta.value() == 2.0) {
    for (std::size_t i = 0; i < vv.size(); ++i) {
      const double d = vv[i] - std::max(uv[i], eps);
      total += 0.5 * d * d;
    }
    return total;
  }
  for (std::size_t i = 0; i < vv.size(); ++i) total += divergence(vv[i], uv[i], beta, eps);
  return total;
}

}  // namespace betacnmf
