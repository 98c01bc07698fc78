#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace meta_audit {

/// Counts read off one base study.
struct StudyCounts {
  std::string id;
  std::string label;  // e.g. first author; informational
  std::int64_t outcomes = 0;
  std::int64_t predictors = 0;
  std::int64_t covariates = 0;
  std::int64_t lags = 1;
  std::int64_t foods = 0;  // informational, not part of any space

  // Values as printed in a source table, when the input carries them.
  std::optional<std::uint64_t> reported_space1;
  std::optional<std::uint64_t> reported_space2;
  std::optional<std::uint64_t> reported_space3;
};

/// space1 = outcomes * predictors * lags
/// space2 = 2^covariates
/// space3 = space1 * space2
struct SearchSpaceRecord {
  StudyCounts counts;
  std::uint64_t space1 = 0;
  std::uint64_t space2 = 0;
  std::uint64_t space3 = 0;

  /// True when every reported space present in `counts` matches.
  bool matches_reported() const;
};

inline constexpr std::int64_t kMaxCovariates = 62;

/// Exact integer arithmetic. Throws std::domain_error for zero/negative
/// outcomes, predictors or lags, or negative covariates/foods; throws
/// std::overflow_error above kMaxCovariates or when a product overflows.
SearchSpaceRecord compute_spaces(const StudyCounts& counts);

struct SpaceSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Type-6 quartiles of space3. Throws std::invalid_argument when empty.
SpaceSummary summarize_spaces(std::span<const SearchSpaceRecord> records);

}  // namespace meta_audit
