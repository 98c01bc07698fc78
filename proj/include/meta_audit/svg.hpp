#pragma once

#include <filesystem>
#include <string>

#include "meta_audit/diagnostics.hpp"

namespace meta_audit {

/// Self-contained SVG 1.1 p-value plot: sorted p against raw rank, the
/// single-line fit (solid), the two-segment fit (dashed, with a breakpoint
/// marker) when present, a dotted reference at p = 0.05, and a green
/// downward triangle on the minimum p when that study reports a decrease.
///
/// Element classes: point, single-fit, segment-fit, breakpoint, reference,
/// min-p-decrease.
std::string render_pvalue_plot_svg(const PValuePlot& plot,
                                   const DiagnosticReport& report);

void write_pvalue_plot_svg(const PValuePlot& plot,
                           const DiagnosticReport& report,
                           const std::filesystem::path& path);

}  // namespace meta_audit
