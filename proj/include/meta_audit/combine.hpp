#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace meta_audit {

/// Per-study p-values below this are raised to it before taking logs.
inline constexpr double kFisherFloor = 1e-300;

/// Two-sided 95% normal multiplier used for PooledResult::ci95.
inline constexpr double kZ95 = 1.959964;

/// A p-value below e^-1 contributes more than its null expectation (2) to
/// the Fisher statistic. Often quoted as "0.37".
inline constexpr double kElstonThreshold = 1.0 / std::numbers::e;

struct FisherResult {
  double statistic = 0.0;  // sum of contributions
  int df = 0;              // 2k
  double combined_p = 1.0;
  std::vector<double> contributions;   // -2 ln p_i
  std::vector<std::size_t> clamped;    // indices raised to kFisherFloor
};

/// Fisher's combined probability test. Throws std::invalid_argument on an
/// empty list or any p outside (0, 1].
FisherResult fisher_combine(std::span<const double> pvalues);

/// Indices i with p_i < e^-1.
std::vector<std::size_t> elston_flags(std::span<const double> pvalues);

enum class PoolMode { fixed, random };

std::string_view to_string(PoolMode m);

struct PooledResult {
  double pooled = 0.0;
  double se_pooled = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  double tau2 = 0.0;
  double q_statistic = 0.0;
  PoolMode mode = PoolMode::fixed;
  std::vector<double> weights;  // normalized to sum to 1
};

/// Inverse-variance pooling. Random mode estimates tau^2 with the
/// DerSimonian-Laird moment estimator, truncated at zero:
///
///   Q      = sum w_i (v_i - v_fixed)^2,   w_i = 1 / se_i^2
///   tau^2  = max(0, (Q - (k - 1)) / (sum w - sum w^2 / sum w))
///
/// and re-pools with w_i* = 1 / (se_i^2 + tau^2). Q is reported in both
/// modes. A single study has Q = tau^2 = 0.
PooledResult dl_pool(std::span<const double> effects,
                     std::span<const double> ses, PoolMode mode);

}  // namespace meta_audit
