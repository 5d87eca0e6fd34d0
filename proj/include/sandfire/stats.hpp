#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "sandfire/errors.hpp"

namespace sandfire {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double ibeta_cf(double a, double b, double x) {
  constexpr double kEps = 1e-12;
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Regularized incomplete beta I_x(a, b).
inline double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * ibeta_cf(a, b, x) / a;
  }
  return 1.0 - bt * ibeta_cf(b, a, 1.0 - x) / b;
}

// One-sided upper tail of Student's t, real-valued df (Welch needs fractional df).
inline double student_t_tail_df(double t, double df) {
  if (df <= 0.0) throw ConfigError("student_t_tail: df must be >= 1");
  if (t == 0.0) return 0.5;
  if (df == 1.0) {
    // Cauchy closed form; exact at the t=1 quarter point.
    return t > 0.0 ? std::atan(1.0 / t) / std::numbers::pi
                   : 1.0 - std::atan(-1.0 / t) / std::numbers::pi;
  }
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * ibeta(0.5 * df, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

}  // namespace detail

// P(T >= t) for Student's t with df degrees of freedom.
inline double student_t_tail(double t, int df) {
  if (df < 1) throw ConfigError("student_t_tail: df must be >= 1");
  return detail::student_t_tail_df(t, static_cast<double>(df));
}

// Upper tail of the F distribution, P(F >= f).
inline double f_upper_tail(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw ConfigError("f_upper_tail: df must be >= 1");
  if (f <= 0.0) return 1.0;
  const double d1 = static_cast<double>(df1);
  const double d2 = static_cast<double>(df2);
  return detail::ibeta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

struct RegressionFit {
  int n = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  double r_squared = 0.0;
  double t_stat = 0.0;       // slope / se_slope; +-inf on a perfect sloped fit
  double p_two_sided = 1.0;  // H0: slope = 0, df = n - 2
};

// Simple least-squares line fit with slope inference.
inline RegressionFit ols_fit(std::span<const Point> points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw InsufficientDataError("ols_fit: need at least 3 points, got " + std::to_string(n));

  double mean_x = 0.0, mean_y = 0.0;
  for (const Point& p : points) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Point& p : points) {
    const double dx = p.x - mean_x;
    const double dy = p.y - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw UndefinedStatisticError("ols_fit: x-values are all equal");

  RegressionFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;

  const double rss = std::max(0.0, syy - fit.slope * sxy);
  const double sigma2 = rss / (n - 2);
  fit.se_slope = std::sqrt(sigma2 / sxx);
  fit.se_intercept = std::sqrt(sigma2 * (1.0 / n + mean_x * mean_x / sxx));
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;

  if (fit.se_slope > 0.0) {
    fit.t_stat = fit.slope / fit.se_slope;
    fit.p_two_sided = std::min(1.0, 2.0 * student_t_tail(std::fabs(fit.t_stat), n - 2));
  } else if (fit.slope == 0.0) {
    fit.t_stat = 0.0;
    fit.p_two_sided = 1.0;
  } else {
    fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    fit.p_two_sided = 0.0;
  }
  return fit;
}

inline RegressionFit ols_fit(const std::vector<Point>& points) {
  return ols_fit(std::span<const Point>(points));
}

struct SlopeComparison {
  double t = 0.0;
  int df = 0;                // n1 + n2 - 4
  double p_one_sided = 0.5;  // tail in the direction of the observed difference
  double p_two_sided = 1.0;
};

// Pooled t-test for equality of two regression slopes:
//   t = (b1 - b2) / sqrt(se1^2 + se2^2),  df = n1 + n2 - 4.
// The standard errors combine under the radical with a plus sign; a minus
// would be non-positive whenever se1 <= se2.
inline SlopeComparison compare_slopes(const RegressionFit& fit1, const RegressionFit& fit2) {
  if (fit1.n + fit2.n < 5) {
    throw InsufficientDataError("compare_slopes: n1 + n2 must be >= 5");
  }
  const double pooled_var = fit1.se_slope * fit1.se_slope + fit2.se_slope * fit2.se_slope;
  if (pooled_var == 0.0) {
    throw UndefinedStatisticError("compare_slopes: both slope standard errors are zero");
  }
  SlopeComparison cmp;
  cmp.t = (fit1.slope - fit2.slope) / std::sqrt(pooled_var);
  cmp.df = fit1.n + fit2.n - 4;
  cmp.p_one_sided = student_t_tail(std::fabs(cmp.t), cmp.df);
  cmp.p_two_sided = std::min(1.0, 2.0 * cmp.p_one_sided);
  return cmp;
}

enum class TTestVariant { Pooled, Welch };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;  // fractional under Welch
  double p_two_sided = 1.0;
};

namespace detail {

struct SampleMoments {
  int n = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased (n - 1)
};

inline SampleMoments moments(std::span<const double> xs) {
  SampleMoments m;
  m.n = static_cast<int>(xs.size());
  for (double v : xs) m.mean += v;
  m.mean /= m.n;
  for (double v : xs) m.var += (v - m.mean) * (v - m.mean);
  m.var /= (m.n - 1);
  return m;
}

}  // namespace detail

inline TTestResult two_sample_t(std::span<const double> sample_a, std::span<const double> sample_b,
                                TTestVariant variant = TTestVariant::Pooled) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw InsufficientDataError("two_sample_t: each sample needs at least 2 values");
  }
  const auto a = detail::moments(sample_a);
  const auto b = detail::moments(sample_b);

  TTestResult res;
  if (variant == TTestVariant::Pooled) {
    const double pooled_var = ((a.n - 1) * a.var + (b.n - 1) * b.var) / (a.n + b.n - 2);
    if (pooled_var == 0.0) throw UndefinedStatisticError("two_sample_t: zero pooled variance");
    res.df = a.n + b.n - 2;
    res.t = (a.mean - b.mean) / std::sqrt(pooled_var * (1.0 / a.n + 1.0 / b.n));
  } else {
    const double va = a.var / a.n;
    const double vb = b.var / b.n;
    if (va + vb == 0.0) throw UndefinedStatisticError("two_sample_t: zero combined variance");
    res.t = (a.mean - b.mean) / std::sqrt(va + vb);
    res.df = (va + vb) * (va + vb) / (va * va / (a.n - 1) + vb * vb / (b.n - 1));
  }
  res.p_two_sided = std::min(1.0, 2.0 * detail::student_t_tail_df(std::fabs(res.t), res.df));
  return res;
}

inline TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b,
                                TTestVariant variant = TTestVariant::Pooled) {
  return two_sample_t(std::span<const double>(a), std::span<const double>(b), variant);
}

struct AnovaResult {
  double f = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p = 1.0;
};

inline AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InsufficientDataError("one_way_anova: need at least 2 groups");
  int total_n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw InsufficientDataError("one_way_anova: every group needs at least 2 values");
    total_n += static_cast<int>(g.size());
    for (double v : g) grand_sum += v;
  }
  const double grand_mean = grand_sum / total_n;
  const int k = static_cast<int>(groups.size());

  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double v : g) m += v;
    m /= g.size();
    ss_between += g.size() * (m - grand_mean) * (m - grand_mean);
    for (double v : g) ss_within += (v - m) * (v - m);
  }

  AnovaResult res;
  res.df_between = k - 1;
  res.df_within = total_n - k;
  const double ms_within = ss_within / res.df_within;
  if (ms_within == 0.0) throw UndefinedStatisticError("one_way_anova: zero within-group variance");
  res.f = (ss_between / res.df_between) / ms_within;
  res.p = f_upper_tail(res.f, res.df_between, res.df_within);
  return res;
}

}  // namespace sandfire
