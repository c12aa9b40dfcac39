#include "betacnmf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betacnmf/errors.hpp"

namespace betacnmf {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(std::span<const double> xs) {
  Moments out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  for (double x : xs) out.variance += (x - out.mean) * (x - out.mean);
  out.variance /= static_cast<double>(xs.size() - 1);
  return out;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (std::isnan(x) || x < 0.0 || x > 1.0) throw ValidationError("incomplete beta needs x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on the near side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double p = regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return std::min(1.0, std::max(0.0, p));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("Welch's t-test needs at least two values per sample");
  }
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = ma.variance / na;
  const double sb = mb.variance / nb;

  WelchResult out;
  if (sa + sb == 0.0) {
    out.degrees_of_freedom = na + nb - 2.0;
    if (ma.mean == mb.mean) return out;
    out.t_statistic = ma.mean > mb.mean ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.t_statistic = (ma.mean - mb.mean) / std::sqrt(sa + sb);
  out.degrees_of_freedom =
      (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  out.p_value = student_t_two_tailed_p(out.t_statistic, out.degrees_of_freedom);
  return out;
}

}  // namespace betacnmf
