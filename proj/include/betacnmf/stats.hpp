#pragma once

#include <span>

namespace betacnmf {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_tailed_p(double t, double df);

struct WelchResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
};

/// Two-sample Welch t-test, two-tailed, unbiased sample variances.
///
/// Both samples need at least two values. When both variances vanish the
/// result is t = 0, p = 1 for equal means and t = +-inf, p = 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace betacnmf
