#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "llds/errors.hpp"
#include "llds/io.hpp"
#include "llds/model.hpp"

namespace llds::io {

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                            const char* color, bool dashed) {
  std::ostringstream out;
  out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
  if (dashed) out << " stroke-dasharray=\"6 4\"";
  out << " points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out << ' ';
    out << svg_num(xs[i]) << ',' << svg_num(ys[i]);
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace detail

// Writes a standalone SVG 1.1 document with one pane per state component:
// the measured series as a solid polyline, the predicted series dashed,
// linear axes auto-scaled with a 5% margin, tick labels, axis labels and a
// legend. The file contains exactly 2 * dim polyline elements.
inline void emit_plot(const std::string& path, const Trajectory& real,
                      const Trajectory& predicted, std::vector<std::string> labels = {},
                      long long t0 = 1) {
  if (real.length() != predicted.length() || real.dim() != predicted.dim()) {
    fail(Errc::dimension_mismatch, "emit_plot: series shapes differ");
  }
  if (labels.empty()) labels = detail::default_names("x", real.dim());
  if (labels.size() != real.dim()) {
    fail(Errc::dimension_mismatch, "emit_plot: label count mismatch");
  }

  const std::size_t n = real.dim();
  const std::size_t T = real.length();
  const double pane_w = 640.0, pane_h = 200.0;
  const double margin_left = 70.0, margin_right = 30.0;
  const double margin_top = 34.0, margin_bottom = 46.0;
  const double width = margin_left + pane_w + margin_right;
  const double pane_stride = margin_top + pane_h + margin_bottom;
  const double height = pane_stride * static_cast<double>(n);

  const char* color_real = "#1f6fb4";
  const char* color_pred = "#d0452b";

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << detail::svg_num(width) << "\" height=\"" << detail::svg_num(height)
      << "\" viewBox=\"0 0 " << detail::svg_num(width) << ' ' << detail::svg_num(height)
      << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const double t_lo = static_cast<double>(t0);
  const double t_hi = static_cast<double>(t0) + static_cast<double>(T - 1);
  const double t_span = (T > 1) ? (t_hi - t_lo) : 1.0;

  for (std::size_t comp = 0; comp < n; ++comp) {
    double lo = real.state(0)[comp], hi = lo;
    for (std::size_t t = 0; t < T; ++t) {
      lo = std::min({lo, real.state(t)[comp], predicted.state(t)[comp]});
      hi = std::max({hi, real.state(t)[comp], predicted.state(t)[comp]});
    }
    double pad = 0.05 * (hi - lo);
    if (pad == 0.0) pad = std::max(0.05 * std::abs(hi), 1e-9);  // constant series
    lo -= pad;
    hi += pad;

    const double top = pane_stride * static_cast<double>(comp) + margin_top;
    const double left = margin_left;
    auto map_x = [&](double t) { return left + (t - t_lo) / t_span * pane_w; };
    auto map_y = [&](double v) { return top + pane_h - (v - lo) / (hi - lo) * pane_h; };

    svg << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
    // frame
    svg << "  <rect x=\"" << detail::svg_num(left) << "\" y=\"" << detail::svg_num(top)
        << "\" width=\"" << detail::svg_num(pane_w) << "\" height=\""
        << detail::svg_num(pane_h) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    // ticks: 5 per axis
    for (int k = 0; k <= 4; ++k) {
      const double frac = static_cast<double>(k) / 4.0;
      const double tv = t_lo + frac * t_span;
      const double xv = map_x(tv);
      svg << "  <line x1=\"" << detail::svg_num(xv) << "\" y1=\""
          << detail::svg_num(top + pane_h) << "\" x2=\"" << detail::svg_num(xv)
          << "\" y2=\"" << detail::svg_num(top + pane_h + 5) << "\" stroke=\"#333333\"/>\n"
          << "  <text x=\"" << detail::svg_num(xv) << "\" y=\""
          << detail::svg_num(top + pane_h + 19) << "\" text-anchor=\"middle\">"
          << detail::svg_num(tv) << "</text>\n";
      const double vv = lo + frac * (hi - lo);
      const double yv = map_y(vv);
      svg << "  <line x1=\"" << detail::svg_num(left - 5) << "\" y1=\""
          << detail::svg_num(yv) << "\" x2=\"" << detail::svg_num(left) << "\" y2=\""
          << detail::svg_num(yv) << "\" stroke=\"#333333\"/>\n"
          << "  <text x=\"" << detail::svg_num(left - 9) << "\" y=\""
          << detail::svg_num(yv + 4) << "\" text-anchor=\"end\">" << detail::svg_num(vv)
          << "</text>\n";
    }

    // axis labels
    svg << "  <text x=\"" << detail::svg_num(left + pane_w / 2) << "\" y=\""
        << detail::svg_num(top + pane_h + 38) << "\" text-anchor=\"middle\">t</text>\n";
    svg << "  <text x=\"" << detail::svg_num(left - 52) << "\" y=\""
        << detail::svg_num(top + pane_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << detail::svg_num(left - 52) << ' ' << detail::svg_num(top + pane_h / 2) << ")\">"
        << labels[comp] << "</text>\n";

    // series
    std::vector<double> xs(T), ys_real(T), ys_pred(T);
    for (std::size_t t = 0; t < T; ++t) {
      xs[t] = map_x(t_lo + static_cast<double>(t));
      ys_real[t] = map_y(real.state(t)[comp]);
      ys_pred[t] = map_y(predicted.state(t)[comp]);
    }
    svg << detail::polyline(xs, ys_real, color_real, false);
    svg << detail::polyline(xs, ys_pred, color_pred, true);

    // legend (plain line elements, so the polyline count stays 2 per pane)
    const double lx = left + pane_w - 150.0, ly = top + 14.0;
    svg << "  <line x1=\"" << detail::svg_num(lx) << "\" y1=\"" << detail::svg_num(ly)
        << "\" x2=\"" << detail::svg_num(lx + 26) << "\" y2=\"" << detail::svg_num(ly)
        << "\" stroke=\"" << color_real << "\" stroke-width=\"1.5\"/>\n"
        << "  <text x=\"" << detail::svg_num(lx + 32) << "\" y=\"" << detail::svg_num(ly + 4)
        << "\">measured</text>\n"
        << "  <line x1=\"" << detail::svg_num(lx) << "\" y1=\"" << detail::svg_num(ly + 16)
        << "\" x2=\"" << detail::svg_num(lx + 26) << "\" y2=\"" << detail::svg_num(ly + 16)
        << "\" stroke=\"" << color_pred << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n"
        << "  <text x=\"" << detail::svg_num(lx + 32) << "\" y=\"" << detail::svg_num(ly + 20)
        << "\">predicted</text>\n";
    svg << "  </g>\n";
  }

  svg << "</svg>\n";
  detail::write_file_atomic(path, svg.str());
}

}  // namespace llds::io
