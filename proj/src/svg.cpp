#include "meta_audit/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "meta_audit/errors.hpp"

namespace meta_audit {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps raw rank and p to canvas coordinates.
class Frame {
 public:
  explicit Frame(std::size_t n) : n_(static_cast<double>(n)) {}

  double x(double rank) const {
    const double span = std::max(n_ - 1.0, 1.0);
    const double t = n_ <= 1.0 ? 0.5 : (rank - 1.0) / span;
    return kLeft + t * (kWidth - kLeft - kRight);
  }
  double y(double p) const { return kTop + (1.0 - p) * (kHeight - kTop - kBottom); }
  // Fits live in normalized-rank coordinates.
  double fit_y(const FitLine& f, double rank) const {
    return y(f.at(rank / (n_ + 1.0)));
  }

 private:
  double n_;
};

void line(std::ostringstream& os, std::string_view cls, double x1, double y1,
          double x2, double y2, std::string_view style) {
  os << "  <line class=\"" << cls << "\" x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1)
     << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" " << style
     << " clip-path=\"url(#plot-area)\"/>\n";
}

}  // namespace

std::string render_pvalue_plot_svg(const PValuePlot& plot,
                                   const DiagnosticReport& report) {
  const std::size_t n = plot.n();
  const Frame f(n);
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kTop;
  const double y1 = kHeight - kBottom;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
     << kWidth << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\">\n"
     << "  <defs><clipPath id=\"plot-area\"><rect x=\"" << fmt(x0) << "\" y=\""
     << fmt(y0) << "\" width=\"" << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0)
     << "\"/></clipPath></defs>\n"
     << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "  <rect class=\"frame\" x=\"" << fmt(x0) << "\" y=\"" << fmt(y0)
     << "\" width=\"" << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Axis ticks and labels.
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "  <text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(f.y(p) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << p << "</text>\n";
  }
  os << "  <text x=\"" << fmt(x0) << "\" y=\"" << fmt(y1 + 18)
     << "\" font-size=\"11\" text-anchor=\"middle\">1</text>\n";
  if (n > 1) {
    os << "  <text x=\"" << fmt(x1) << "\" y=\"" << fmt(y1 + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  os << "  <text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 12)
     << "\" font-size=\"12\" text-anchor=\"middle\">Rank</text>\n"
     << "  <text x=\"16\" y=\"" << fmt((y0 + y1) / 2)
     << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << fmt((y0 + y1) / 2) << ")\">p-value</text>\n";

  line(os, "reference", x0, f.y(0.05), x1, f.y(0.05),
       "stroke=\"gray\" stroke-dasharray=\"1,3\"");

  if (report.single_fit && n >= 2) {
    line(os, "single-fit", f.x(1), f.fit_y(*report.single_fit, 1.0), f.x(n),
         f.fit_y(*report.single_fit, static_cast<double>(n)),
         "stroke=\"steelblue\" stroke-width=\"1.5\"");
  }
  if (report.two_segment) {
    const auto& t = *report.two_segment;
    const auto b = static_cast<double>(t.breakpoint_rank);
    line(os, "segment-fit", f.x(1), f.fit_y(t.left, 1.0), f.x(b),
         f.fit_y(t.left, b), "stroke=\"firebrick\" stroke-dasharray=\"6,4\"");
    line(os, "segment-fit", f.x(b + 1), f.fit_y(t.right, b + 1), f.x(n),
         f.fit_y(t.right, static_cast<double>(n)),
         "stroke=\"firebrick\" stroke-dasharray=\"6,4\"");
    const double bx = (f.x(b) + f.x(b + 1)) / 2;
    line(os, "breakpoint", bx, y0, bx, y1,
         "stroke=\"firebrick\" stroke-opacity=\"0.4\"");
  }

  for (const auto& pt : plot.points) {
    os << "  <circle class=\"point\" cx=\"" << fmt(f.x(static_cast<double>(pt.rank)))
       << "\" cy=\"" << fmt(f.y(pt.p)) << "\" r=\"3.5\" fill=\"black\"><title>"
       << escape(pt.study_id) << ": p=" << pt.p << "</title></circle>\n";
  }

  if (n > 0 && plot.points.front().direction == Direction::decrease) {
    const double cx = f.x(1);
    const double cy = f.y(plot.points.front().p);
    os << "  <polygon class=\"min-p-decrease\" points=\"" << fmt(cx - 7) << ','
       << fmt(cy - 5) << ' ' << fmt(cx + 7) << ',' << fmt(cy - 5) << ' ' << fmt(cx)
       << ',' << fmt(cy + 7) << "\" fill=\"green\"/>\n";
  }

  os << "  <text x=\"" << fmt(x1) << "\" y=\"20\" font-size=\"11\" text-anchor=\"end\">"
     << escape(to_string(report.classification)) << "</text>\n"
     << "</svg>\n";
  return os.str();
}

void write_pvalue_plot_svg(const PValuePlot& plot,
                           const DiagnosticReport& report,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << render_pvalue_plot_svg(plot, report);
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace meta_audit
