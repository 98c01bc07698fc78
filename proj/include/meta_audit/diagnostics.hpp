#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meta_audit/numerics.hpp"
#include "meta_audit/study.hpp"

namespace meta_audit {

struct PlotPoint {
  std::size_t rank = 0;          // 1..n
  double normalized_rank = 0.0;  // rank / (n + 1)
  double p = 0.0;
  std::string study_id;
  Direction direction = Direction::unspecified;
};

/// Sorted p-values against rank. Under the null the points scatter around
/// the identity line in normalized-rank coordinates.
struct PValuePlot {
  std::vector<PlotPoint> points;

  std::size_t n() const { return points.size(); }
  std::vector<double> xs() const;  // normalized ranks
  std::vector<double> ys() const;  // sorted p-values
};

struct TwoSegmentFit {
  std::size_t breakpoint_rank = 0;  // last rank of the left segment
  FitLine left;
  FitLine right;
  double combined_sse = 0.0;
};

enum class PlotClass { null_uniform, effect, bilinear_mixture, ambiguous };

std::string_view to_string(PlotClass c);
std::optional<PlotClass> parse_plot_class(std::string_view text);

/// Thresholds for classify_plot. Reading a p-value plot is usually done by
/// eye; these numbers are a fixed local policy.
struct ClassifierThresholds {
  double significance = 0.05;        // "small" p
  double definitive = 0.001;         // p at or below counts as definitive
  double effect_min_fraction = 0.5;  // effect: frac(p < significance) above
  double effect_max_slope = 1.0;     // effect: single-line slope below
  double null_slope_lo = 0.8;        // null: slope band
  double null_slope_hi = 1.25;
  double null_max_fraction = 0.2;    // null: frac(p < significance) below
  double sse_improvement = 0.5;      // two-segment relative SSE reduction
};

struct DiagnosticReport {
  std::size_t n = 0;
  std::optional<FitLine> single_fit;         // n >= 2
  std::optional<TwoSegmentFit> two_segment;  // n >= 6
  PlotClass classification = PlotClass::ambiguous;
  double frac_below_005 = 0.0;
  std::size_t elston_count = 0;
  std::size_t definitive_count = 0;
  Direction min_p_direction = Direction::unspecified;

  /// 1 - combined_sse / single_sse, or 0 when there is nothing to improve.
  double sse_improvement() const;
};

/// Stable-sorts the studies' p-values (derived from effect/se when absent).
/// Throws DataError if a study has neither, std::invalid_argument if empty.
PValuePlot build_pvalue_plot(const MetaDataset& ds);
PValuePlot build_pvalue_plot(std::span<const double> pvalues);

/// Exhaustive two-piece least-squares fit over breakpoints 3..n-3; ties go
/// to the smallest breakpoint. Throws std::invalid_argument when n < 6.
TwoSegmentFit fit_two_segment(const PValuePlot& plot);

/// Rules in order: effect, null_uniform, bilinear_mixture, else ambiguous.
DiagnosticReport classify_plot(const PValuePlot& plot,
                               const ClassifierThresholds& thresholds = {});

}  // namespace meta_audit
