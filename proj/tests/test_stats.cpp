#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "betacnmf/errors.hpp"
#include "betacnmf/stats.hpp"

using namespace betacnmf;

namespace {

// Two-tailed p by composite Simpson integration of the Student t density.
double p_by_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * std::acos(-1.0));
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const double a = 0, b = std::abs(t);
  const int n = 20000;
  const double h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(a + i * h);
  return 1.0 - 2.0 * (s * h / 3);
}

}  // namespace

TEST_CASE("regularized incomplete beta") {
  CHECK(regularized_incomplete_beta(2, 2, 0.8) == doctest::Approx(0.896).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(3, 2, 0.8) == doctest::Approx(0.8192).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2, 3, 0.8) == doctest::Approx(0.9728).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2, 2, 0.4) == doctest::Approx(0.352).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2, 5, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 5, 1.0) == 1.0);
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  CHECK(regularized_incomplete_beta(4.5, 0.5, 0.7) ==
        doctest::Approx(1 - regularized_incomplete_beta(0.5, 4.5, 0.3)).epsilon(1e-12));
}

TEST_CASE("student t tail") {
  CHECK(student_t_two_tailed_p(0, 5) == 1.0);
  CHECK(student_t_two_tailed_p(std::numeric_limits<double>::infinity(), 5) == 0.0);
  // df = 1 is the Cauchy distribution.
  CHECK(student_t_two_tailed_p(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  for (double df : {2.0, 7.5, 30.0})
    for (double t : {0.3, 1.0, 2.5})
      CHECK(student_t_two_tailed_p(t, df) ==
            doctest::Approx(p_by_quadrature(t, df)).epsilon(1e-8));
}

TEST_CASE("welch t-test") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 3, 4, 5, 6};

  SUBCASE("identical samples") {
    const auto r = welch_t_test(a, a);
    CHECK(r.t_statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("shifted samples") {
    const auto r = welch_t_test(a, b);
    CHECK(r.t_statistic == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r.degrees_of_freedom == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(r.p_value == doctest::Approx(p_by_quadrature(1.0, 8.0)).epsilon(1e-8));
  }
  SUBCASE("antisymmetric in the arguments") {
    const std::vector<double> c{1.5, 4, 2, 9, 3.3, 7};
    const auto ab = welch_t_test(a, c);
    const auto ba = welch_t_test(c, a);
    CHECK(ab.t_statistic == doctest::Approx(-ba.t_statistic));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
    CHECK(ab.degrees_of_freedom == doctest::Approx(ba.degrees_of_freedom));
  }
  SUBCASE("p shrinks as the gap widens") {
    double last = 1.0;
    for (double shift : {0.5, 1.0, 2.0, 4.0}) {
      std::vector<double> s = a;
      for (double& x : s) x += shift;
      const double p = welch_t_test(a, s).p_value;
      CHECK(p < last);
      last = p;
    }
  }
  SUBCASE("unequal variances") {
    const std::vector<double> x{10, 11, 12};
    const std::vector<double> y{1, 5, 9, 13, 17, 21};
    // Hand computation: vx = 1, vy = 56, se2 = 1/3 + 56/6.
    const double se2 = 1.0 / 3 + 56.0 / 6;
    const double df = se2 * se2 / ((1.0 / 9) / 2 + (56.0 / 6) * (56.0 / 6) / 5);
    const auto r = welch_t_test(x, y);
    CHECK(r.t_statistic == doctest::Approx((11.0 - 11.0) / std::sqrt(se2)));
    CHECK(r.degrees_of_freedom == doctest::Approx(df).epsilon(1e-12));
  }
  SUBCASE("zero variance") {
    const std::vector<double> c1{3, 3, 3};
    const std::vector<double> c2{4, 4};
    const auto same = welch_t_test(c1, c1);
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value == 1.0);
    const auto diff = welch_t_test(c1, c2);
    CHECK(std::isinf(diff.t_statistic));
    CHECK(diff.t_statistic < 0);
    CHECK(diff.p_value == 0.0);
    CHECK(diff.degrees_of_freedom == 3.0);
  }
  SUBCASE("too few values") {
    const std::vector<double> one{1};
    CHECK_THROWS_AS(welch_t_test(one, a), ValidationError);
    CHECK_THROWS_AS(welch_t_test(a, one), ValidationError);
  }
}
