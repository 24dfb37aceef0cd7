#pragma once

// Static SVG scatter plot of relative variograms against lag time on a
// log2 axis. Output depends only on the data passed in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "atlasid/error.hpp"

namespace atlasid::plot {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> t;
  std::vector<double> y;
};

struct Figure {
  std::string title;
  std::string x_label = "lag t (log2 scale)";
  std::string y_label = "relative variogram";
  std::vector<Series> series;
  std::optional<double> reference_y;
};

namespace detail {
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace detail

inline std::string render_svg(const Figure& fig) {
  constexpr double W = 720, H = 480, L = 70, R = 20, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymax = fig.reference_y.value_or(0.0);
  for (const auto& s : fig.series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!(s.t[i] > 0.0)) continue;
      xmin = std::min(xmin, std::log2(s.t[i]));
      xmax = std::max(xmax, std::log2(s.t[i]));
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
  }
  xmin = std::floor(xmin);
  xmax = std::max(std::ceil(xmax), xmin + 1);
  ymax = std::max(0.1, std::ceil(ymax * 10.0) / 10.0);
  const double ymin = 0.0;

  auto px = [&](double log2t) { return L + (log2t - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  using detail::fmt;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" +
       fmt(H) + "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       detail::escape(fig.title) + "</text>\n";
  // axes
  s += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(H - B) + "\" x2=\"" + fmt(W - R) +
       "\" y2=\"" + fmt(H - B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(T) + "\" x2=\"" + fmt(L) + "\" y2=\"" +
       fmt(H - B) + "\" stroke=\"black\"/>\n";
  const int xstep = (xmax - xmin) > 12 ? 2 : 1;
  for (int k = static_cast<int>(xmin); k <= static_cast<int>(xmax); k += xstep) {
    const double x = px(k);
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(H - B) + "\" x2=\"" + fmt(x) +
         "\" y2=\"" + fmt(H - B + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(H - B + 20) +
         "\" text-anchor=\"middle\" font-size=\"11\">2^" + std::to_string(k) + "</text>\n";
  }
  const int yticks = static_cast<int>(std::lround(ymax * 10.0));
  const int ystep = yticks > 10 ? 2 : 1;
  for (int k = 0; k <= yticks; k += ystep) {
    const double yv = k / 10.0;
    const double y = py(yv);
    s += "<line x1=\"" + fmt(L - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(L) +
         "\" y2=\"" + fmt(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(L - 8) + "\" y=\"" + fmt(y + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + fmt(yv).substr(0, 3) + "</text>\n";
  }
  s += "<text x=\"" + fmt((L + W - R) / 2) + "\" y=\"" + fmt(H - 15) +
       "\" text-anchor=\"middle\" font-size=\"12\">" + detail::escape(fig.x_label) +
       "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt((T + H - B) / 2) +
       "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 " +
       fmt((T + H - B) / 2) + ")\">" + detail::escape(fig.y_label) + "</text>\n";

  if (fig.reference_y) {
    const double y = py(*fig.reference_y);
    s += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(W - R) +
         "\" y2=\"" + fmt(y) + "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  double legend_y = T + 10;
  for (const auto& ser : fig.series) {
    for (std::size_t i = 0; i < ser.t.size(); ++i) {
      if (!(ser.t[i] > 0.0) || !std::isfinite(ser.y[i])) continue;
      s += "<circle cx=\"" + fmt(px(std::log2(ser.t[i]))) + "\" cy=\"" +
           fmt(py(ser.y[i])) + "\" r=\"3.5\" fill=\"" + ser.color + "\"/>\n";
    }
    s += "<circle cx=\"" + fmt(W - R - 170) + "\" cy=\"" + fmt(legend_y) + "\" r=\"3.5\" fill=\"" +
         ser.color + "\"/>\n";
    s += "<text x=\"" + fmt(W - R - 160) + "\" y=\"" + fmt(legend_y + 4) +
         "\" font-size=\"11\">" + detail::escape(ser.label) + "</text>\n";
    legend_y += 16;
  }
  s += "</svg>\n";
  return s;
}

inline void write_svg(const std::filesystem::path& path, const Figure& fig) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out << render_svg(fig);
  out.flush();
  if (!out) throw Error(Errc::io, "write to '" + path.string() + "' failed");
}

}  // namespace atlasid::plot
