#pragma once

// Self-contained SVG renderings of the run outputs.  Coordinates are rounded
// to fixed precision and colors to integer channels, so the documents are
// byte-deterministic for identical inputs.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fraclab/common.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {
namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* series_color(int s) {
  static const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#17becf"};
  return palette[s % 6];
}

}  // namespace detail

// Polyline chart of one or more series over a shared abscissa.  A log10
// ordinate plots the magnitudes, with nonpositive values clamped to the
// smallest positive entry.
inline std::string svg_line_chart(const std::string& title,
                                  const Eigen::VectorXd& x,
                                  const std::vector<Eigen::VectorXd>& series,
                                  bool log_ordinate = false) {
  require(!series.empty(), "plot-error", "chart needs at least one series");
  for (const Eigen::VectorXd& s : series)
    require(s.size() == x.size(), "plot-error",
            "series length does not match the abscissa");

  const double w = 640.0, h = 400.0, ml = 60.0, mr = 20.0, mt = 40.0, mb = 40.0;
  double ylo = 1e300, yhi = -1e300, floor_pos = 1e300;
  for (const Eigen::VectorXd& s : series)
    for (int i = 0; i < s.size(); ++i)
      if (s[i] > 0.0) floor_pos = std::min(floor_pos, s[i]);
  if (floor_pos == 1e300) floor_pos = 1e-300;
  auto ordinate = [&](double v) {
    return log_ordinate ? std::log10(std::max(std::abs(v), floor_pos)) : v;
  };
  for (const Eigen::VectorXd& s : series)
    for (int i = 0; i < s.size(); ++i) {
      ylo = std::min(ylo, ordinate(s[i]));
      yhi = std::max(yhi, ordinate(s[i]));
    }
  if (yhi - ylo < 1e-300) {
    yhi += 1.0;
    ylo -= 1.0;
  }
  const double xlo = x.minCoeff(), xhi = std::max(x.maxCoeff(), xlo + 1e-300);
  auto px = [&](double v) { return ml + (w - ml - mr) * (v - xlo) / (xhi - xlo); };
  auto py = [&](double v) {
    return h - mb - (h - mt - mb) * (ordinate(v) - ylo) / (yhi - ylo);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
                    "height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<rect x=\"" + detail::svg_num(ml) + "\" y=\"" + detail::svg_num(mt) +
         "\" width=\"" + detail::svg_num(w - ml - mr) + "\" height=\"" +
         detail::svg_num(h - mt - mb) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (const char* anchor : {"lo", "hi"}) {
    const bool lo = anchor[0] == 'l';
    const double yv = lo ? ylo : yhi;
    svg += "<text x=\"" + detail::svg_num(ml - 6.0) + "\" y=\"" +
           detail::svg_num(lo ? h - mb : mt + 10.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           (log_ordinate ? "1e" + detail::svg_num(yv) : detail::svg_num(yv)) +
           "</text>\n";
  }
  for (size_t s = 0; s < series.size(); ++s) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += detail::series_color(static_cast<int>(s));
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i < x.size(); ++i) {
      if (i) svg += ' ';
      svg += detail::svg_num(px(x[i])) + "," + detail::svg_num(py(series[s][i]));
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// Node scatter of a grid function on the disk with a diverging palette,
// symmetric about zero, plus the boundary circle for orientation.
inline std::string svg_disk_heatmap(const std::string& title,
                                    const InteriorGrid& grid,
                                    const Eigen::VectorXd& values) {
  require(values.size() == grid.size(), "plot-error",
          "heatmap values do not match the grid");
  const double size = 480.0, cx = size / 2.0, cy = size / 2.0 + 14.0;
  const double scale = 0.44 * size / grid.geom.radius;
  const double vmax = std::max(values.cwiseAbs().maxCoeff(), 1e-300);

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" "
                    "height=\"508\" viewBox=\"0 0 480 508\">\n";
  svg += "<rect width=\"480\" height=\"508\" fill=\"white\"/>\n";
  svg += "<text x=\"240\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<circle cx=\"" + detail::svg_num(cx) + "\" cy=\"" + detail::svg_num(cy) +
         "\" r=\"" + detail::svg_num(scale * grid.geom.radius) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k < grid.size(); ++k) {
    const Vec2 p = grid.nodes[k] - grid.geom.center;
    const double t = values[k] / vmax;  // diverging blue-white-red
    const int r = static_cast<int>(std::lround(255.0 * (t >= 0.0 ? 1.0 : 1.0 + t)));
    const int b = static_cast<int>(std::lround(255.0 * (t <= 0.0 ? 1.0 : 1.0 - t)));
    const int g = std::min(r, b);
    char color[8];
    std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
    svg += "<circle cx=\"" + detail::svg_num(cx + scale * p.x()) + "\" cy=\"" +
           detail::svg_num(cy - scale * p.y()) + "\" r=\"5\" fill=\"" + color +
           "\"/>\n";
  }
  svg += "<text x=\"240\" y=\"500\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">max |value| = " + fmt17(vmax) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace fraclab
