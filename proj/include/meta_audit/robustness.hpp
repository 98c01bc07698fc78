#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meta_audit/combine.hpp"
#include "meta_audit/study.hpp"

namespace meta_audit {

enum class Method { fisher, dl_fixed, dl_random };

std::string_view to_string(Method m);
/// Accepts "fisher", "dl-fixed"/"dl_fixed", "dl-random"/"dl_random".
std::optional<Method> parse_method(std::string_view text);

using CombinedResult = std::variant<FisherResult, PooledResult>;

/// Runs `method` over the whole dataset.
CombinedResult combine(const MetaDataset& ds, Method method);

/// Fisher: combined_p < alpha. DL: the (1 - alpha) normal interval around
/// the pooled effect excludes zero.
bool is_significant(const CombinedResult& result, double alpha);

struct InfluenceRecord {
  std::string study_id;
  Method method = Method::fisher;
  CombinedResult result_without;
  double delta = 0.0;  // Fisher: p_with - p_without; DL: pooled_with - pooled_without
  bool significant_with = false;
  bool significant_without = false;
  bool verdict_flip = false;
};

/// Jackknife influence of every study, sorted by |delta| descending (ties in
/// input order). Throws std::invalid_argument for fewer than two studies.
std::vector<InfluenceRecord> leave_one_out(const MetaDataset& ds,
                                           Method method, double alpha);

/// Largest p that, appended as one extra study, makes the Fisher test
/// significant at alpha:
///
///   p* = exp(-(chi2_quantile(alpha, 2(k+1)) - S) / 2)
///
/// where S is the current statistic. Returns 1 when the set is significant
/// even after appending p = 1.
double min_flip_pvalue(std::span<const double> pvalues, double alpha);
double min_flip_pvalue(const MetaDataset& ds, double alpha);

struct BreakdownReport {
  std::size_t n_background = 0;
  double background_p = 0.0;
  double alpha = 0.0;
  double combined_p_before = 0.0;
  double min_flip_p = 0.0;
  double contaminant_p = 0.0;  // min_flip_p / 10
  double combined_p_after = 0.0;
  bool significant_after = false;
  double contaminant_share = 0.0;  // contaminant's fraction of the statistic
};

/// How a single contaminant overturns n copies of `background_p`.
BreakdownReport breakdown_report(std::size_t n_background, double background_p,
                                 double alpha);

}  // namespace meta_audit
