#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dymacl/errors.hpp"

namespace dymacl {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1).
inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double standard_error(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
  const int max_iter = 200;
  const double eps = 3e-14;
  const double fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Student-t CDF with df degrees of freedom.
inline double student_t_cdf(double t, double df) {
  double x = df / (df + t * t);
  double p = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - p : p;
}

// One-sided paired t-test p-value for H1: mean(x - y) > 0. Returns 1.0 when
// the differences are all zero (no evidence either way).
inline double paired_t_pvalue_greater(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ContractError("paired test needs two equal-length samples, n >= 2");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  double sd = stddev(d);
  double md = mean(d);
  if (sd == 0.0) return md > 0.0 ? 0.0 : 1.0;
  double t = md / (sd / std::sqrt(static_cast<double>(d.size())));
  return 1.0 - student_t_cdf(t, static_cast<double>(d.size() - 1));
}

// Checks empirical category counts against a uniform distribution: every
// category must lie within `sigmas` standard deviations of its expectation.
inline bool counts_uniform_within(const std::vector<std::size_t>& counts, std::size_t draws,
                                  double sigmas) {
  if (counts.empty() || draws == 0) return false;
  double p = 1.0 / static_cast<double>(counts.size());
  double expectation = static_cast<double>(draws) * p;
  double sigma = std::sqrt(static_cast<double>(draws) * p * (1.0 - p));
  for (std::size_t c : counts) {
    if (std::fabs(static_cast<double>(c) - expectation) > sigmas * sigma) return false;
  }
  return true;
}

}  // namespace dymacl
