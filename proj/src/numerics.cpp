#include "meta_audit/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "meta_audit/errors.hpp"

namespace meta_audit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

// Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

// P(a, x) by its power series; valid (and fast) for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
    }
  }
  throw NumericError("gamma_p series did not converge for a=" +
                     std::to_string(a) + ", x=" + std::to_string(x));
}

// Q(a, x) by continued fraction (modified Lentz); valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
    }
  }
  throw NumericError("gamma_q continued fraction did not converge for a=" +
                     std::to_string(a) + ", x=" + std::to_string(x));
}

}  // namespace

double ln_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error("ln_gamma: argument must be finite and > 0, got " +
                            std::to_string(x));
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Shift up so the approximation is evaluated where it is most accurate.
    return ln_gamma(x + 1.0) - std::log(x);
  }
  const double z = x - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    series += kLanczos[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(series);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("gamma_q: shape must be finite and > 0");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("gamma_q: x must be >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return clamp_probability(1.0 - gamma_p_series(a, x));
  return clamp_probability(gamma_q_fraction(a, x));
}

double chi_square_sf(double x, int df) {
  if (df < 1) {
    throw std::domain_error("chi_square_sf: df must be >= 1, got " +
                            std::to_string(df));
  }
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("chi_square_sf: x must be >= 0, got " +
                            std::to_string(x));
  }
  return gamma_q(0.5 * df, 0.5 * x);
}

double chi_square_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("chi_square_quantile: p must lie in (0, 1), got " +
                            std::to_string(p));
  }
  if (df < 1) {
    throw std::domain_error("chi_square_quantile: df must be >= 1");
  }
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (chi_square_sf(hi, df) > p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw NumericError("chi_square_quantile: failed to bracket root");
    }
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (chi_square_sf(mid, df) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_sf(double z) {
  return clamp_probability(0.5 * std::erfc(z / std::numbers::sqrt2));
}

double two_sided_p(double z) {
  return clamp_probability(std::erfc(std::fabs(z) / std::numbers::sqrt2));
}

double normal_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_upper_quantile: p must lie in (0, 1)");
  }
  // normal_sf underflows near z = 38.5; this bracket covers every double p.
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (normal_sf(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double quantile_type6(std::span<const double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile_type6: empty input");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("quantile_type6: p must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  if (!std::all_of(sorted.begin(), sorted.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("quantile_type6: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double h = std::clamp(p * (n + 1.0), 1.0, n);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  const double lower = sorted[lo - 1];
  const double upper = sorted[hi - 1];
  return lower + (h - static_cast<double>(lo)) * (upper - lower);
}

FitLine ols_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("ols_fit: xs and ys differ in length");
  }
  const std::size_t n = xs.size();
  if (n < 2) {
    throw std::invalid_argument("ols_fit: need at least two points");
  }
  if (std::all_of(xs.begin(), xs.end(),
                  [&](double x) { return x == xs.front(); })) {
    throw std::invalid_argument("ols_fit: degenerate input, all x identical");
  }
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - x_mean;
    sxx += dx * dx;
    sxy += dx * (ys[i] - y_mean);
  }
  FitLine fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.at(xs[i]);
    fit.sse += r * r;
  }
  return fit;
}

}  // namespace meta_audit
