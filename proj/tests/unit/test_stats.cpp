#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvox/stats.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace curvox;

TEST_CASE("incomplete beta against closed forms") {
  for (const double x : {0.05, 0.2, 0.5, 0.8, 0.95}) {
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.5, 0.5, x) ==
          doctest::Approx((2.0 / 3.14159265358979323846) * std::asin(std::sqrt(x)))
              .epsilon(1e-12));
    CHECK(regularized_incomplete_beta(1.0, 3.0, x) ==
          doctest::Approx(1.0 - std::pow(1.0 - x, 3.0)).epsilon(1e-12));
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student t cdf and two-sided p against closed forms") {
  for (const double t : {0.1, 0.5, 1.0, 2.0, 4.0, 10.0}) {
    CHECK(student_t_two_sided_p(t, 1.0) == doctest::Approx(oracle::t_two_sided_p_df1(t)).epsilon(1e-10));
    CHECK(student_t_two_sided_p(t, 2.0) == doctest::Approx(oracle::t_two_sided_p_df2(t)).epsilon(1e-10));
    CHECK(student_t_cdf(t, 2.0) + student_t_cdf(-t, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
  // Tabulated critical value: t_{0.975}(df=2) = 4.303.
  CHECK(student_t_two_sided_p(4.302652729911275, 2.0) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("p is monotone decreasing in |t| at fixed df") {
  for (const double df : {1.0, 2.0, 5.0, 30.0}) {
    double prev = 1.1;
    for (double t = 0.0; t <= 8.0; t += 0.25) {
      const double p = student_t_two_sided_p(t, df);
      CHECK(p <= prev + 1e-15);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      prev = p;
    }
  }
}

TEST_CASE("paired t-test on d = (1,2,3)") {
  const std::vector<double> a = {2.0, 4.0, 6.0};
  const std::vector<double> b = {1.0, 2.0, 3.0};
  const StatResult r = paired_t_test(a, b);
  CHECK(std::fabs(r.t - 3.4641016151377544) <= 1e-3);
  CHECK(r.df == 2.0);
  CHECK(r.p > 0.05);
  CHECK(r.p < 0.10);
  // Closed-form oracle for df=2.
  CHECK(std::fabs(r.p - 0.07417990022744858) <= 1e-10);
  CHECK(r.mean_diff == doctest::Approx(2.0));
}

TEST_CASE("paired t-test degenerate and symmetry cases") {
  const std::vector<double> same = {1.0, 2.0, 3.0};
  const StatResult eq = paired_t_test(same, same);
  CHECK(eq.t == 0.0);
  CHECK(eq.p == 1.0);
  CHECK_FALSE(eq.exact_separation);

  // sd = 0 with nonzero mean: exact separation.
  const std::vector<double> shifted = {2.0, 3.0, 4.0};
  const StatResult sep = paired_t_test(shifted, same);
  CHECK(sep.exact_separation);
  CHECK(sep.p == 0.0);
  CHECK(std::isinf(sep.t));
  CHECK(sep.t > 0.0);

  // Negating both samples flips t's sign, preserves p.
  const std::vector<double> a = {2.0, 4.1, 5.6};
  const std::vector<double> b = {1.0, 2.2, 3.3};
  std::vector<double> na, nb;
  for (double v : a) na.push_back(-v);
  for (double v : b) nb.push_back(-v);
  const StatResult fwd = paired_t_test(a, b);
  const StatResult rev = paired_t_test(na, nb);
  CHECK(fwd.t == doctest::Approx(-rev.t).epsilon(1e-12));
  CHECK(fwd.p == doctest::Approx(rev.p).epsilon(1e-12));
  CHECK((fwd.t > 0) == (fwd.mean_diff > 0));

  // Shift invariance: adding a constant to both samples.
  std::vector<double> sa, sb;
  for (double v : a) sa.push_back(v + 100.0);
  for (double v : b) sb.push_back(v + 100.0);
  const StatResult shifted_r = paired_t_test(sa, sb);
  CHECK(std::fabs(shifted_r.t - fwd.t) <= 1e-9);

  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}
