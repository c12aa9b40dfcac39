#pragma once

#include "betacnmf/nnmat.hpp"

namespace betacnmf {

/// The beta of the beta-divergence family. Branches for 0 and 1 are picked by
/// exact comparison, so Beta{1.0 + 1e-9} takes the general branch.
class Beta {
 public:
  explicit Beta(double value);

  double value() const noexcept { return value_; }
  bool is_itakura_saito() const noexcept { return value_ == 0.0; }
  bool is_kullback_leibler() const noexcept { return value_ == 1.0; }

  friend bool operator==(const Beta&, const Beta&) = default;

 private:
  double value_;
};

/// Scalar beta-divergence d(p | q).
///
/// q is always clamped to max(q, eps). p is clamped only where a logarithm or
/// a division by p needs it: the whole beta = 0 branch and the log(p/q) of the
/// beta = 1 branch, where p * log(.) still vanishes for p = 0.
double divergence(double p, double q, Beta beta, double eps = kDefaultEps);

/// Entrywise sum of `divergence` over two equally shaped matrices.
double divergence(const NonnegMatrix& v, const NonnegMatrix& u, Beta beta,
                  double eps = kDefaultEps);

}  // namespace betacnmf
