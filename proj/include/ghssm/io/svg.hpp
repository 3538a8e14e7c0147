#pragma once

// Self-contained SVG line plot: one panel per state component with the
// filtered mean, a +-3 sigma band and, optionally, the true path.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace ghssm::io {

struct SvgPanel {
  std::string label;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> truth;  // empty if unknown
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

inline void write_svg(std::ostream& out, const std::vector<double>& time, const std::vector<SvgPanel>& panels) {
  constexpr double width = 900.0, panel_h = 260.0, pad = 50.0;
  const double height = panel_h * static_cast<double>(panels.size()) + pad;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (time.empty()) {
    out << "</svg>\n";
    return;
  }
  const double t0 = time.front();
  const double t1 = time.back() > t0 ? time.back() : t0 + 1.0;
  auto sx = [&](double t) { return pad + (t - t0) / (t1 - t0) * (width - 2 * pad); };

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& pn = panels[p];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < time.size(); ++i) {
      lo = std::min(lo, pn.mean[i] - 3 * pn.sd[i]);
      hi = std::max(hi, pn.mean[i] + 3 * pn.sd[i]);
      if (!pn.truth.empty()) {
        lo = std::min(lo, pn.truth[i]);
        hi = std::max(hi, pn.truth[i]);
      }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double top = pad * 0.5 + panel_h * static_cast<double>(p);
    const double bottom = top + panel_h - pad;
    auto sy = [&](double v) { return bottom - (v - lo) / (hi - lo) * (bottom - top); };

    out << "<g>\n<rect x=\"" << pad << "\" y=\"" << detail::fmt(top) << "\" width=\"" << width - 2 * pad
        << "\" height=\"" << detail::fmt(bottom - top) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << detail::fmt(top - 6) << "\">" << pn.label << "</text>\n";
    out << "<text x=\"4\" y=\"" << detail::fmt(top + 10) << "\">" << detail::fmt(hi) << "</text>\n";
    out << "<text x=\"4\" y=\"" << detail::fmt(bottom) << "\">" << detail::fmt(lo) << "</text>\n";

    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < time.size(); ++i)
      out << detail::fmt(sx(time[i])) << ',' << detail::fmt(sy(pn.mean[i] + 3 * pn.sd[i])) << ' ';
    for (std::size_t i = time.size(); i-- > 0;)
      out << detail::fmt(sx(time[i])) << ',' << detail::fmt(sy(pn.mean[i] - 3 * pn.sd[i])) << ' ';
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < time.size(); ++i)
      out << detail::fmt(sx(time[i])) << ',' << detail::fmt(sy(pn.mean[i])) << ' ';
    out << "\"/>\n";

    if (!pn.truth.empty()) {
      out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\" stroke-dasharray=\"4 2\" points=\"";
      for (std::size_t i = 0; i < time.size(); ++i)
        out << detail::fmt(sx(time[i])) << ',' << detail::fmt(sy(pn.truth[i])) << ' ';
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << detail::fmt(height - 8) << "\">time</text>\n</svg>\n";
}

}  // namespace ghssm::io
