#include "meta_audit/searchspace.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "meta_audit/numerics.hpp"

namespace meta_audit {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b,
                          const std::string& id) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("search space of study '" + id +
                              "' overflows 64 bits");
  }
  return a * b;
}

void require_positive(std::int64_t v, const char* field, const std::string& id) {
  if (v < 1) {
    throw std::domain_error(std::string(field) + " must be >= 1 for study '" +
                            id + "', got " + std::to_string(v));
  }
}

}  // namespace

bool SearchSpaceRecord::matches_reported() const {
  return (!counts.reported_space1 || *counts.reported_space1 == space1) &&
         (!counts.reported_space2 || *counts.reported_space2 == space2) &&
         (!counts.reported_space3 || *counts.reported_space3 == space3);
}

SearchSpaceRecord compute_spaces(const StudyCounts& counts) {
  require_positive(counts.outcomes, "outcomes", counts.id);
  require_positive(counts.predictors, "predictors", counts.id);
  require_positive(counts.lags, "lags", counts.id);
  if (counts.covariates < 0) {
    throw std::domain_error("covariates must be >= 0 for study '" + counts.id +
                            "'");
  }
  if (counts.foods < 0) {
    throw std::domain_error("foods must be >= 0 for study '" + counts.id + "'");
  }
  if (counts.covariates > kMaxCovariates) {
    throw std::overflow_error("covariates = " +
                              std::to_string(counts.covariates) +
                              " exceeds the limit of " +
                              std::to_string(kMaxCovariates) + " for study '" +
                              counts.id + "'");
  }

  SearchSpaceRecord r;
  r.counts = counts;
  r.space1 = checked_mul(
      checked_mul(static_cast<std::uint64_t>(counts.outcomes),
                  static_cast<std::uint64_t>(counts.predictors), counts.id),
      static_cast<std::uint64_t>(counts.lags), counts.id);
  r.space2 = std::uint64_t{1} << counts.covariates;
  r.space3 = checked_mul(r.space1, r.space2, counts.id);
  return r;
}

SpaceSummary summarize_spaces(std::span<const SearchSpaceRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("summarize_spaces: no records");
  }
  std::vector<double> s3;
  s3.reserve(records.size());
  for (const auto& r : records) s3.push_back(static_cast<double>(r.space3));
  return {quantile_type6(s3, 0.5), quantile_type6(s3, 0.25),
          quantile_type6(s3, 0.75)};
}

}  // namespace meta_audit
