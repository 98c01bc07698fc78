#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "meta_audit/errors.hpp"
#include "meta_audit/searchspace.hpp"
#include "meta_audit/study.hpp"

namespace meta_audit {

/// Dataset rows that parsed but broke a BaseStudy invariant.
class ValidationError : public DataError {
 public:
  ValidationError(const std::string& source, std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Study table. Columns (any order, `id` required):
///   id, p_value, effect, se, rr, ci_low, ci_high, direction
///
/// A risk ratio with its 95% interval is converted to the log scale:
///   effect = ln(rr),  se = (ln(ci_high) - ln(ci_low)) / (2 * 1.959964)
/// If effect/se are given too they must agree to 1e-6 relative.
/// When direction is blank it is taken from the sign of the effect.
/// Lines starting with '#' and blank lines are skipped.
MetaDataset parse_studies_csv(const std::filesystem::path& path);
MetaDataset parse_studies_text(std::string_view text, std::string source,
                               std::string label);

/// Count table: id, outcomes, predictors, covariates required; optional
/// lags (default 1), foods (default 0), label, year, and the printed
/// space1/space2/space3 for cross-checking.
std::vector<StudyCounts> parse_counts_csv(const std::filesystem::path& path);
std::vector<StudyCounts> parse_counts_text(std::string_view text,
                                           std::string source);

}  // namespace meta_audit
