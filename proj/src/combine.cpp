#include "meta_audit/combine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "meta_audit/numerics.hpp"

namespace meta_audit {

FisherResult fisher_combine(std::span<const double> pvalues) {
  if (pvalues.empty()) {
    throw std::invalid_argument("fisher_combine: no p-values");
  }
  FisherResult r;
  r.contributions.reserve(pvalues.size());
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    double p = pvalues[i];
    if (!(p > 0.0 && p <= 1.0)) {
      throw std::invalid_argument("fisher_combine: p-value #" +
                                  std::to_string(i) + " = " +
                                  std::to_string(p) + " is outside (0, 1]");
    }
    if (p < kFisherFloor) {
      p = kFisherFloor;
      r.clamped.push_back(i);
    }
    r.contributions.push_back(-2.0 * std::log(p));
  }
  for (double c : r.contributions) r.statistic += c;
  r.df = static_cast<int>(2 * pvalues.size());
  r.combined_p = chi_square_sf(r.statistic, r.df);
  return r;
}

std::vector<std::size_t> elston_flags(std::span<const double> pvalues) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    if (pvalues[i] < kElstonThreshold) out.push_back(i);
  }
  return out;
}

std::string_view to_string(PoolMode m) {
  return m == PoolMode::fixed ? "fixed" : "random";
}

namespace {

struct WeightedMean {
  double mean = 0.0;
  double total_weight = 0.0;
};

WeightedMean weighted_mean(std::span<const double> values,
                           std::span<const double> weights) {
  WeightedMean wm;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += weights[i] * values[i];
    wm.total_weight += weights[i];
  }
  wm.mean = acc / wm.total_weight;
  return wm;
}

}  // namespace

PooledResult dl_pool(std::span<const double> effects,
                     std::span<const double> ses, PoolMode mode) {
  if (effects.empty()) {
    throw std::invalid_argument("dl_pool: no studies");
  }
  if (effects.size() != ses.size()) {
    throw std::invalid_argument("dl_pool: effects and ses differ in length");
  }
  for (std::size_t i = 0; i < ses.size(); ++i) {
    if (!(ses[i] > 0.0) || !std::isfinite(ses[i])) {
      throw std::invalid_argument("dl_pool: se #" + std::to_string(i) +
                                  " must be positive and finite");
    }
    if (!std::isfinite(effects[i])) {
      throw std::invalid_argument("dl_pool: effect #" + std::to_string(i) +
                                  " is not finite");
    }
  }

  const std::size_t k = effects.size();
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = 1.0 / (ses[i] * ses[i]);
  const WeightedMean fixed = weighted_mean(effects, w);

  double q = 0.0;
  double sum_w2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = effects[i] - fixed.mean;
    q += w[i] * d * d;
    sum_w2 += w[i] * w[i];
  }

  PooledResult r;
  r.mode = mode;
  r.q_statistic = k > 1 ? q : 0.0;

  WeightedMean used = fixed;
  if (mode == PoolMode::random && k > 1) {
    const double c = fixed.total_weight - sum_w2 / fixed.total_weight;
    const double tau2 =
        c > 0.0 ? std::max(0.0, (q - static_cast<double>(k - 1)) / c) : 0.0;
    r.tau2 = tau2;
    if (tau2 > 0.0) {
      for (std::size_t i = 0; i < k; ++i) {
        w[i] = 1.0 / (ses[i] * ses[i] + tau2);
      }
      used = weighted_mean(effects, w);
    }
  }

  r.pooled = used.mean;
  // A convex combination cannot leave the input range; rounding can.
  const auto [lo, hi] = std::minmax_element(effects.begin(), effects.end());
  r.pooled = std::clamp(r.pooled, *lo, *hi);
  r.se_pooled = 1.0 / std::sqrt(used.total_weight);
  r.ci95 = {r.pooled - kZ95 * r.se_pooled, r.pooled + kZ95 * r.se_pooled};
  r.weights.resize(k);
  for (std::size_t i = 0; i < k; ++i) r.weights[i] = w[i] / used.total_weight;
  return r;
}

}  // namespace meta_audit
