#include "meta_audit/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "meta_audit/numerics.hpp"

namespace meta_audit {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1), got " +
                            std::to_string(alpha));
  }
}

MetaDataset without(const MetaDataset& ds, std::size_t skip) {
  MetaDataset sub;
  sub.label = ds.label;
  sub.studies.reserve(ds.studies.size() - 1);
  for (std::size_t i = 0; i < ds.studies.size(); ++i) {
    if (i != skip) sub.studies.push_back(ds.studies[i]);
  }
  return sub;
}

double headline(const CombinedResult& r) {
  if (const auto* f = std::get_if<FisherResult>(&r)) return f->combined_p;
  return std::get<PooledResult>(r).pooled;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::fisher:
      return "fisher";
    case Method::dl_fixed:
      return "dl-fixed";
    case Method::dl_random:
      break;
  }
  return "dl-random";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "fisher") return Method::fisher;
  if (text == "dl-fixed" || text == "dl_fixed") return Method::dl_fixed;
  if (text == "dl-random" || text == "dl_random") return Method::dl_random;
  return std::nullopt;
}

CombinedResult combine(const MetaDataset& ds, Method method) {
  if (method == Method::fisher) {
    const auto p = resolve_pvalues(ds);
    return fisher_combine(p);
  }
  const auto cols = resolve_effects(ds);
  return dl_pool(cols.effects, cols.ses,
                 method == Method::dl_fixed ? PoolMode::fixed
                                            : PoolMode::random);
}

bool is_significant(const CombinedResult& result, double alpha) {
  check_alpha(alpha);
  if (const auto* f = std::get_if<FisherResult>(&result)) {
    return f->combined_p < alpha;
  }
  const auto& d = std::get<PooledResult>(result);
  const double z = normal_upper_quantile(alpha / 2.0);
  return d.pooled - z * d.se_pooled > 0.0 || d.pooled + z * d.se_pooled < 0.0;
}

std::vector<InfluenceRecord> leave_one_out(const MetaDataset& ds,
                                           Method method, double alpha) {
  check_alpha(alpha);
  if (ds.studies.size() < 2) {
    throw std::invalid_argument(
        "leave_one_out: need at least two studies, got " +
        std::to_string(ds.studies.size()));
  }
  const CombinedResult full = combine(ds, method);
  const bool sig_full = is_significant(full, alpha);
  const double full_value = headline(full);

  std::vector<InfluenceRecord> out;
  out.reserve(ds.studies.size());
  for (std::size_t i = 0; i < ds.studies.size(); ++i) {
    InfluenceRecord rec;
    rec.study_id = ds.studies[i].id;
    rec.method = method;
    rec.result_without = combine(without(ds, i), method);
    rec.delta = full_value - headline(rec.result_without);
    rec.significant_with = sig_full;
    rec.significant_without = is_significant(rec.result_without, alpha);
    rec.verdict_flip = rec.significant_with != rec.significant_without;
    out.push_back(std::move(rec));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.delta) > std::fabs(b.delta);
  });
  return out;
}

double min_flip_pvalue(std::span<const double> pvalues, double alpha) {
  check_alpha(alpha);
  if (pvalues.empty()) {
    throw std::invalid_argument("min_flip_pvalue: empty dataset");
  }
  const FisherResult current = fisher_combine(pvalues);
  const int df = current.df + 2;
  const double critical = chi_square_quantile(alpha, df);
  const double gap = critical - current.statistic;
  if (gap <= 0.0) return 1.0;
  const double p = std::exp(-gap / 2.0);
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0);
}

double min_flip_pvalue(const MetaDataset& ds, double alpha) {
  if (ds.studies.empty()) {
    throw std::invalid_argument("min_flip_pvalue: empty dataset");
  }
  return min_flip_pvalue(resolve_pvalues(ds), alpha);
}

BreakdownReport breakdown_report(std::size_t n_background, double background_p,
                                 double alpha) {
  if (n_background < 1) {
    throw std::invalid_argument("breakdown_report: n_background must be >= 1");
  }
  if (!(background_p > 0.0 && background_p <= 1.0)) {
    throw std::invalid_argument("breakdown_report: background_p outside (0, 1]");
  }
  BreakdownReport rep;
  rep.n_background = n_background;
  rep.background_p = background_p;
  rep.alpha = alpha;

  std::vector<double> pvalues(n_background, background_p);
  rep.combined_p_before = fisher_combine(pvalues).combined_p;
  rep.min_flip_p = min_flip_pvalue(pvalues, alpha);
  rep.contaminant_p = rep.min_flip_p / 10.0;

  pvalues.push_back(rep.contaminant_p);
  const FisherResult after = fisher_combine(pvalues);
  rep.combined_p_after = after.combined_p;
  rep.significant_after = after.combined_p < alpha;
  rep.contaminant_share =
      after.statistic > 0.0 ? after.contributions.back() / after.statistic : 0.0;
  return rep;
}

}  // namespace meta_audit
