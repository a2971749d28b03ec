#include "curvox/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace curvox {

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * betacf(a, b, x) / a;
  }
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) {
    throw std::invalid_argument("student_t_cdf: df must be positive");
  }
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) {
    throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  }
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

StatResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_t_test: samples must have equal length");
  }
  const int n = static_cast<int>(a.size());
  if (n < 2) {
    throw std::invalid_argument("paired_t_test: need at least 2 pairs");
  }
  StatResult result;
  result.a.assign(a.begin(), a.end());
  result.b.assign(b.begin(), b.end());
  result.df = n - 1;

  std::vector<double> d(static_cast<std::size_t>(n));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
    mean += d[static_cast<std::size_t>(i)];
  }
  mean /= n;
  result.mean_diff = mean;

  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dev = d[static_cast<std::size_t>(i)] - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / (n - 1));

  if (sd == 0.0) {
    if (mean == 0.0) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
      result.exact_separation = true;
    }
    return result;
  }

  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p = student_t_two_sided_p(result.t, result.df);
  return result;
}

}  // namespace curvox
