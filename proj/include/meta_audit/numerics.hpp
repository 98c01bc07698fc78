#pragma once

#include <cstddef>
#include <span>

namespace meta_audit {

/// Least-squares line y = intercept + slope * x.
struct FitLine {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;  // minimized sum of squared residuals
  std::size_t n = 0;

  double at(double x) const { return intercept + slope * x; }
};

/// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double ln_gamma(double x);

/// Regularized upper incomplete gamma function Q(a, x).
///
/// Uses the power series for P(a, x) when x < a + 1 and a Lentz-evaluated
/// continued fraction for Q(a, x) otherwise. Throws NumericError if either
/// expansion fails to converge.
double gamma_q(double a, double x);

/// P(X > x) for X ~ chi-squared with `df` degrees of freedom.
double chi_square_sf(double x, int df);

/// Inverse of chi_square_sf: returns x with chi_square_sf(x, df) == p.
/// Bisection on the survival function, run until the bracket stops
/// shrinking in double precision.
double chi_square_quantile(double p, int df);

/// Standard normal upper tail P(Z > z).
double normal_sf(double z);

/// Two-sided p-value 2 * P(Z > |z|).
double two_sided_p(double z);

/// Returns z with normal_sf(z) == p, for p in (0, 1).
double normal_upper_quantile(double p);

/// Sample quantile using the h = p(n + 1) order-statistic interpolation
/// (Hyndman-Fan type 6). Throws std::invalid_argument on empty or
/// non-finite input and std::domain_error on p outside [0, 1].
double quantile_type6(std::span<const double> values, double p);

/// Ordinary least squares of ys on xs. Throws std::invalid_argument on
/// length mismatch, fewer than two points, or when every x is identical.
FitLine ols_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace meta_audit
