#include "meta_audit/diagnostics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "meta_audit/combine.hpp"

namespace meta_audit {

namespace {

constexpr std::size_t kMinSegment = 3;

// SSE values below this (relative to n) are treated as an exact fit, so
// that ratios of rounding noise cannot drive the classification.
constexpr double kExactFitSse = 1e-20;

double mean_p(std::span<const PlotPoint> pts) {
  double s = 0.0;
  for (const auto& pt : pts) s += pt.p;
  return s / static_cast<double>(pts.size());
}

}  // namespace

std::vector<double> PValuePlot::xs() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(pt.normalized_rank);
  return out;
}

std::vector<double> PValuePlot::ys() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(pt.p);
  return out;
}

std::string_view to_string(PlotClass c) {
  switch (c) {
    case PlotClass::null_uniform:
      return "null_uniform";
    case PlotClass::effect:
      return "effect";
    case PlotClass::bilinear_mixture:
      return "bilinear_mixture";
    case PlotClass::ambiguous:
      break;
  }
  return "ambiguous";
}

std::optional<PlotClass> parse_plot_class(std::string_view text) {
  for (auto c : {PlotClass::null_uniform, PlotClass::effect,
                 PlotClass::bilinear_mixture, PlotClass::ambiguous}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

double DiagnosticReport::sse_improvement() const {
  if (!single_fit || !two_segment) return 0.0;
  const double scale = kExactFitSse * static_cast<double>(n);
  if (single_fit->sse <= scale) return 0.0;
  return 1.0 - two_segment->combined_sse / single_fit->sse;
}

PValuePlot build_pvalue_plot(const MetaDataset& ds) {
  if (ds.studies.empty()) {
    throw std::invalid_argument("build_pvalue_plot: empty dataset");
  }
  const auto pvalues = resolve_pvalues(ds);
  std::vector<std::size_t> order(pvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return pvalues[a] < pvalues[b];
  });

  PValuePlot plot;
  const double denom = static_cast<double>(order.size() + 1);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& s = ds.studies[order[r]];
    plot.points.push_back({r + 1, static_cast<double>(r + 1) / denom,
                           pvalues[order[r]], s.id, s.direction});
  }
  return plot;
}

PValuePlot build_pvalue_plot(std::span<const double> pvalues) {
  MetaDataset ds;
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    BaseStudy s;
    s.id = std::to_string(i + 1);
    s.p_value = pvalues[i];
    ds.studies.push_back(std::move(s));
  }
  return build_pvalue_plot(ds);
}

TwoSegmentFit fit_two_segment(const PValuePlot& plot) {
  const std::size_t n = plot.n();
  if (n < 2 * kMinSegment) {
    throw std::invalid_argument(
        "fit_two_segment: need at least 6 points, got " + std::to_string(n));
  }
  const auto xs = plot.xs();
  const auto ys = plot.ys();
  const std::span<const double> x{xs};
  const std::span<const double> y{ys};

  // SSE differences at roundoff level count as ties, so an exact fit keeps
  // the smallest breakpoint instead of whichever one the noise favours.
  double mean = 0.0;
  for (double v : ys) mean += v;
  mean /= static_cast<double>(n);
  double total_ss = 0.0;
  for (double v : ys) total_ss += (v - mean) * (v - mean);
  const double tie_tol = 1e-12 * total_ss;

  std::optional<TwoSegmentFit> best;
  for (std::size_t b = kMinSegment; b + kMinSegment <= n; ++b) {
    TwoSegmentFit cand;
    cand.breakpoint_rank = b;
    cand.left = ols_fit(x.first(b), y.first(b));
    cand.right = ols_fit(x.subspan(b), y.subspan(b));
    cand.combined_sse = cand.left.sse + cand.right.sse;
    if (!best || cand.combined_sse < best->combined_sse - tie_tol) best = cand;
  }
  return *best;
}

DiagnosticReport classify_plot(const PValuePlot& plot,
                               const ClassifierThresholds& t) {
  DiagnosticReport rep;
  rep.n = plot.n();
  if (rep.n == 0) return rep;

  std::size_t below = 0;
  for (const auto& pt : plot.points) {
    if (pt.p < t.significance) ++below;
    if (pt.p < kElstonThreshold) ++rep.elston_count;
    if (pt.p <= t.definitive) ++rep.definitive_count;
  }
  rep.frac_below_005 = static_cast<double>(below) / static_cast<double>(rep.n);
  // Stable sort puts the first-listed study first among tied minima.
  rep.min_p_direction = plot.points.front().direction;

  if (rep.n < 2) return rep;
  const auto xs = plot.xs();
  const auto ys = plot.ys();
  rep.single_fit = ols_fit(xs, ys);
  if (rep.n >= 2 * kMinSegment) rep.two_segment = fit_two_segment(plot);

  const double slope = rep.single_fit->slope;
  const double improvement = rep.sse_improvement();

  if (rep.frac_below_005 > t.effect_min_fraction &&
      slope < t.effect_max_slope) {
    rep.classification = PlotClass::effect;
  } else if (slope >= t.null_slope_lo && slope <= t.null_slope_hi &&
             rep.frac_below_005 < t.null_max_fraction &&
             improvement < t.sse_improvement) {
    rep.classification = PlotClass::null_uniform;
  } else if (rep.two_segment && improvement >= t.sse_improvement) {
    const std::span<const PlotPoint> pts{plot.points};
    const auto b = rep.two_segment->breakpoint_rank;
    if (mean_p(pts.first(b)) < t.significance &&
        mean_p(pts.subspan(b)) >= t.significance) {
      rep.classification = PlotClass::bilinear_mixture;
    }
  }
  return rep;
}

}  // namespace meta_audit
