#pragma once

#include <span>
#include <vector>

namespace curvox {

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);

// Two-sided p-value: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

struct StatResult {
  std::vector<double> a;
  std::vector<double> b;
  double mean_diff = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  // Set when sd(d) = 0 with mean(d) != 0: the samples separate exactly and
  // the statistic degenerates; reported as p = 0.
  bool exact_separation = false;
};

// Paired two-sided t-test with sample sd (n-1 divisor). Requires equal
// lengths n >= 2.
StatResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace curvox
