#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "turnhold/io.hpp"
#include "turnhold/survival.hpp"
#include "turnhold/vap.hpp"

namespace turnhold::plot {

// Fixed geometry: tests and downstream tools can invert the coordinate
// transform from these constants alone.
inline constexpr double kWidth = 720;
inline constexpr double kHeight = 480;
inline constexpr double kMarginL = 70;
inline constexpr double kMarginR = 20;
inline constexpr double kMarginT = 40;
inline constexpr double kMarginB = 50;

inline constexpr std::array<const char*, 4> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                        "#9467bd"};

namespace detail {

// Minimal stroke font: polylines on a 4x6 grid, baseline at y=0, drawn as
// SVG paths so no font resources are referenced. Lowercase maps to
// uppercase; anything unknown renders as a box.
inline const std::map<char, const char*>& glyph_table() {
  static const std::map<char, const char*> table = {
      {'A', "0,0 0,4 2,6 4,4 4,0|0,3 4,3"},
      {'B', "0,0 0,6 3,6 4,5 4,4 3,3 0,3|3,3 4,2 4,1 3,0 0,0"},
      {'C', "4,1 3,0 1,0 0,1 0,5 1,6 3,6 4,5"},
      {'D', "0,0 0,6 2,6 4,4 4,2 2,0 0,0"},
      {'E', "4,0 0,0 0,6 4,6|0,3 3,3"},
      {'F', "0,0 0,6 4,6|0,3 3,3"},
      {'G', "4,5 3,6 1,6 0,5 0,1 1,0 3,0 4,1 4,3 2,3"},
      {'H', "0,0 0,6|4,0 4,6|0,3 4,3"},
      {'I', "1,0 3,0|2,0 2,6|1,6 3,6"},
      {'J', "0,1 1,0 3,0 4,1 4,6"},
      {'K', "0,0 0,6|4,6 0,3 4,0"},
      {'L', "0,6 0,0 4,0"},
      {'M', "0,0 0,6 2,3 4,6 4,0"},
      {'N', "0,0 0,6 4,0 4,6"},
      {'O', "1,0 0,1 0,5 1,6 3,6 4,5 4,1 3,0 1,0"},
      {'P', "0,0 0,6 3,6 4,5 4,4 3,3 0,3"},
      {'Q', "1,0 0,1 0,5 1,6 3,6 4,5 4,1 3,0 1,0|2,2 4,0"},
      {'R', "0,0 0,6 3,6 4,5 4,4 3,3 0,3|2,3 4,0"},
      {'S', "4,5 3,6 1,6 0,5 0,4 1,3 3,3 4,2 4,1 3,0 1,0 0,1"},
      {'T', "0,6 4,6|2,6 2,0"},
      {'U', "0,6 0,1 1,0 3,0 4,1 4,6"},
      {'V', "0,6 2,0 4,6"},
      {'W', "0,6 1,0 2,4 3,0 4,6"},
      {'X', "0,0 4,6|0,6 4,0"},
      {'Y', "0,6 2,3 4,6|2,3 2,0"},
      {'Z', "0,6 4,6 0,0 4,0"},
      {'0', "1,0 0,1 0,5 1,6 3,6 4,5 4,1 3,0 1,0|1,1 3,5"},
      {'1', "1,5 2,6 2,0|1,0 3,0"},
      {'2', "0,5 1,6 3,6 4,5 4,4 0,0 4,0"},
      {'3', "0,5 1,6 3,6 4,5 4,4 3,3 1,3|3,3 4,2 4,1 3,0 1,0 0,1"},
      {'4', "3,0 3,6 0,2 4,2"},
      {'5', "4,6 0,6 0,4 3,4 4,3 4,1 3,0 1,0 0,1"},
      {'6', "4,5 3,6 1,6 0,5 0,1 1,0 3,0 4,1 4,2 3,3 0,3"},
      {'7', "0,6 4,6 2,0"},
      {'8', "1,3 0,4 0,5 1,6 3,6 4,5 4,4 3,3 1,3 0,2 0,1 1,0 3,0 4,1 4,2 3,3"},
      {'9', "4,3 1,3 0,4 0,5 1,6 3,6 4,5 4,1 3,0 1,0 0,1"},
      {'.', "2,0 2,0.01"},
      {',', "2,0.5 1.5,-0.8"},
      {'-', "1,3 3,3"},
      {':', "2,1 2,1.01|2,4 2,4.01"},
      {'(', "2.5,6 1.5,4.5 1.5,1.5 2.5,0"},
      {')', "1.5,6 2.5,4.5 2.5,1.5 1.5,0"},
      {'/', "0,0 4,6"},
      {'%', "0,0 4,6|0,5 1,5 1,6 0,6 0,5|3,0 4,0 4,1 3,1 3,0"},
      {'<', "3,5 1,3 3,1"},
      {'>', "1,5 3,3 1,1"},
      {'=', "1,2 3,2|1,4 3,4"},
      {'+', "2,2 2,4|1,3 3,3"},
      {'_', "0,0 4,0"},
      {'|', "2,0 2,6"},
  };
  return table;
}

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline void glyph_strokes(char c, double x0, double baseline, double scale, std::string& d) {
  if (c == ' ') return;
  const auto& table = glyph_table();
  auto it = table.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  const char* spec = it != table.end() ? it->second : "0,0 4,0 4,6 0,6 0,0";
  bool start = true;
  double gx = 0, gy = 0;
  std::string num;
  const auto emit = [&](bool move) {
    d += move ? 'M' : 'L';
    d += fmt2(x0 + gx * scale) + " " + fmt2(baseline - gy * scale);
  };
  const char* p = spec;
  while (true) {
    if (*p == ',' ) {
      gx = std::atof(num.c_str());
      num.clear();
    } else if (*p == ' ' || *p == '|' || *p == '\0') {
      gy = std::atof(num.c_str());
      num.clear();
      emit(start);
      start = (*p == '|');
      if (*p == '\0') break;
    } else {
      num += *p;
    }
    ++p;
  }
}

}  // namespace detail

// Renders text as stroked paths. `anchor`: -1 left, 0 center, +1 right of
// (x, baseline). `size` is the cap height in pixels.
inline std::string text_path(double x, double baseline, double size, std::string_view text,
                             int anchor = -1, const char* color = "#333333") {
  const double scale = size / 6.0;
  const double advance = 6.0 * scale;
  const double width =
      text.empty() ? 0 : advance * static_cast<double>(text.size()) - 2.0 * scale;
  double x0 = x;
  if (anchor == 0) x0 = x - width / 2;
  if (anchor > 0) x0 = x - width;
  std::string d;
  for (char c : text) {
    detail::glyph_strokes(c, x0, baseline, scale, d);
    x0 += advance;
  }
  if (d.empty()) return "";
  return "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
}

namespace detail {

inline double nice_step(double range, int max_ticks) {
  const double rough = range / max_ticks;
  const double base = std::pow(10.0, std::floor(std::log10(rough)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (range / (m * base) <= max_ticks + 1e-9) return m * base;
  return 10.0 * base;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Frame {
  double xmax = 1;          // data range: x in [0, xmax], y in [0, 1]
  double x(double t) const { return kMarginL + (kWidth - kMarginL - kMarginR) * (t / xmax); }
  double y(double v) const { return kHeight - kMarginB - (kHeight - kMarginT - kMarginB) * v; }
};

inline std::string axes(const Frame& fr, const std::string& x_title,
                        const std::string& y_title) {
  std::string svg;
  svg += "<path d=\"M" + fmt2(kMarginL) + " " + fmt2(kMarginT) + "L" + fmt2(kMarginL) + " " +
         fmt2(kHeight - kMarginB) + "L" + fmt2(kWidth - kMarginR) + " " +
         fmt2(kHeight - kMarginB) + "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  const double xstep = nice_step(fr.xmax, 6);
  for (double t = 0; t <= fr.xmax + 1e-9; t += xstep) {
    const double px = fr.x(t);
    svg += "<path d=\"M" + fmt2(px) + " " + fmt2(kHeight - kMarginB) + "L" + fmt2(px) + " " +
           fmt2(kHeight - kMarginB + 5) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += text_path(px, kHeight - kMarginB + 18, 8, tick_label(t), 0);
  }
  for (double v = 0; v <= 1.0 + 1e-9; v += 0.25) {
    const double py = fr.y(v);
    svg += "<path d=\"M" + fmt2(kMarginL - 5) + " " + fmt2(py) + "L" + fmt2(kMarginL) + " " +
           fmt2(py) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += text_path(kMarginL - 9, py + 3, 8, fmt2(v), 1);
    if (v > 0 && v < 1)
      svg += "<path d=\"M" + fmt2(kMarginL) + " " + fmt2(py) + "L" + fmt2(kWidth - kMarginR) +
             " " + fmt2(py) + "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  svg += text_path((kMarginL + kWidth - kMarginR) / 2, kHeight - 12, 9, x_title, 0);
  // Vertical axis title, drawn rotated via a group transform.
  svg += "<g transform=\"rotate(-90 16 " + fmt2((kMarginT + kHeight - kMarginB) / 2) + ")\">" +
         text_path(16, (kMarginT + kHeight - kMarginB) / 2 + 3, 9, y_title, 0) + "</g>\n";
  return svg;
}

inline std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt2(kWidth) + " " +
         fmt2(kHeight) + "\" width=\"" + fmt2(kWidth) + "\" height=\"" + fmt2(kHeight) +
         "\">\n<rect x=\"0\" y=\"0\" width=\"" + fmt2(kWidth) + "\" height=\"" + fmt2(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
}

}  // namespace detail

inline double km_axis_max(std::span<const KMCurve> curves) {
  double tmax = 1.0;
  for (const auto& c : curves) {
    tmax = std::max(tmax, c.max_time);
    for (const auto& s : c.steps) tmax = std::max(tmax, s.time);
  }
  return std::ceil(tmax - 1e-9);
}

// Step-interpolated survival curves, one color per group, legend from group
// names.
inline std::string km_svg(std::span<const KMCurve> curves, const std::string& title = "") {
  if (curves.empty()) throw UsageError("km_svg: no curves");
  detail::Frame fr;
  fr.xmax = km_axis_max(curves);
  std::string svg = detail::svg_open();
  if (!title.empty()) svg += text_path(kWidth / 2, 24, 11, title, 0);
  svg += detail::axes(fr, "TIME (S)", "SURVIVAL");
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& curve = curves[ci];
    const char* color = kPalette[ci % kPalette.size()];
    std::string d = "M" + detail::fmt2(fr.x(0)) + " " + detail::fmt2(fr.y(1.0));
    double prev_s = 1.0;
    for (const auto& step : curve.steps) {
      if (step.time <= 0) continue;
      d += "L" + detail::fmt2(fr.x(step.time)) + " " + detail::fmt2(fr.y(prev_s));
      d += "L" + detail::fmt2(fr.x(step.time)) + " " + detail::fmt2(fr.y(step.survival));
      prev_s = step.survival;
    }
    d += "L" + detail::fmt2(fr.x(fr.xmax)) + " " + detail::fmt2(fr.y(prev_s));
    svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    const double ly = kMarginT + 16 + 16 * static_cast<double>(ci);
    const double lx = kWidth - kMarginR - 170;
    svg += "<path d=\"M" + detail::fmt2(lx) + " " + detail::fmt2(ly - 3) + "L" +
           detail::fmt2(lx + 24) + " " + detail::fmt2(ly - 3) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += text_path(lx + 30, ly, 8, curve.group.empty() ? "ALL" : curve.group);
  }
  svg += "</svg>\n";
  return svg;
}

// One THP track with the decision threshold, the silence onset, and (when
// observed) the shift point marked.
inline std::string thp_svg(const THPSeries& series, double silence_onset,
                           std::optional<double> shift_time = std::nullopt,
                           const std::string& title = "") {
  if (series.values.empty()) throw UsageError("thp_svg: empty series");
  detail::Frame fr;
  fr.xmax = std::ceil(series.duration() - 1e-9);
  std::string svg = detail::svg_open();
  if (!title.empty()) svg += text_path(kWidth / 2, 24, 11, title, 0);
  svg += detail::axes(fr, "TIME (S)", "THP");

  const double y_half = fr.y(0.5);
  svg += "<path d=\"M" + detail::fmt2(fr.x(0)) + " " + detail::fmt2(y_half) + "L" +
         detail::fmt2(fr.x(fr.xmax)) + " " + detail::fmt2(y_half) +
         "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
  svg += text_path(fr.x(fr.xmax) - 4, y_half - 5, 8, "0.5 THRESHOLD", 1, "#888888");

  const double x_onset = fr.x(silence_onset);
  svg += "<path d=\"M" + detail::fmt2(x_onset) + " " + detail::fmt2(fr.y(1.0)) + "L" +
         detail::fmt2(x_onset) + " " + detail::fmt2(fr.y(0.0)) +
         "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";
  svg += text_path(x_onset + 4, kMarginT + 12, 8, "SILENCE", -1, "#888888");

  std::string d;
  for (std::size_t f = 0; f < series.values.size(); ++f) {
    const double t = static_cast<double>(f) / series.frame_rate;
    d += (f == 0 ? "M" : "L");
    d += detail::fmt2(fr.x(t)) + " " + detail::fmt2(fr.y(series.values[f]));
  }
  svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + kPalette[0] +
         "\" stroke-width=\"1.5\"/>\n";

  if (shift_time) {
    const double xs = fr.x(silence_onset + *shift_time);
    svg += "<circle cx=\"" + detail::fmt2(xs) + "\" cy=\"" + detail::fmt2(y_half) +
           "\" r=\"4\" fill=\"" + std::string(kPalette[1]) + "\"/>\n";
    svg += text_path(xs + 7, y_half + 14, 8, "SHIFT", -1, kPalette[1]);
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string thp_to_csv(const THPSeries& series) {
  std::string out = "frame,time,thp\n";
  for (std::size_t f = 0; f < series.values.size(); ++f)
    out += std::to_string(f) + "," +
           format_double(static_cast<double>(f) / series.frame_rate) + "," +
           format_double(series.values[f]) + "\n";
  return out;
}

}  // namespace turnhold::plot
