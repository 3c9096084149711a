#pragma once

// Bare-bones SVG line and grouped-bar charts for curves and power tables.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace robspat::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string num(double v) {
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

struct Frame {
  double width = 720, height = 440, left = 70, right = 150, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(f.width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
     << "</text>\n";
  os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\"" << num(f.width - f.right)
     << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left) << "\" y2=\""
     << num(f.height - f.bottom) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = f.y0 + (f.y1 - f.y0) * k / 4.0;
    os << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(y) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(y) << "</text>\n";
  }
  os << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\"" << num(f.height - 12)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num((f.top + f.height - f.bottom) / 2) << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << num((f.top + f.height - f.bottom) / 2) << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

inline void legend(std::ostringstream& os, const Frame& f, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = f.top + 10 + 18.0 * static_cast<double>(i);
    const double x = f.width - f.right + 14;
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"10\" fill=\""
       << kPalette[i % 8] << "\"/>\n";
    os << "<text x=\"" << num(x + 18) << "\" y=\"" << num(y) << "\" font-size=\"12\">" << escape(labels[i])
       << "</text>\n";
  }
}

}  // namespace detail

inline std::string line_chart(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                              const std::string& ylabel) {
  detail::Frame f;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        f.x0 = f.x1 = s.x[i];
        f.y0 = f.y1 = s.y[i];
        first = false;
      }
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  if (f.x1 == f.x0) f.x1 = f.x0 + 1;
  if (f.y1 == f.y0) f.y1 = f.y0 + 1;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height << "\">\n";
  detail::axes(os, f, title, xlabel, ylabel);
  if (f.y0 < 0 && f.y1 > 0)
    os << "<line x1=\"" << detail::num(f.left) << "\" y1=\"" << detail::num(f.py(0)) << "\" x2=\""
       << detail::num(f.width - f.right) << "\" y2=\"" << detail::num(f.py(0))
       << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << detail::kPalette[k % 8] << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << (i ? " " : "") << detail::num(f.px(s.x[i])) << ',' << detail::num(f.py(s.y[i]));
    os << "\"/>\n";
    labels.push_back(s.label);
  }
  detail::legend(os, f, labels);
  os << "</svg>\n";
  return os.str();
}

/// values[group][series], drawn as side-by-side bars per group on a [0, 1] axis.
inline std::string bar_chart(const std::vector<std::string>& groups, const std::vector<std::string>& series,
                             const std::vector<std::vector<double>>& values, const std::string& title,
                             const std::string& ylabel) {
  detail::Frame f;
  f.x0 = 0;
  f.x1 = static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  f.y0 = 0;
  f.y1 = 1;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height << "\">\n";
  detail::axes(os, f, title, "", ylabel);
  const double slot = f.px(1) - f.px(0);
  const double bar = 0.8 * slot / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t s = 0; s < series.size() && s < values[g].size(); ++s) {
      const double v = std::clamp(values[g][s], 0.0, 1.0);
      const double x = f.px(static_cast<double>(g)) + 0.1 * slot + bar * static_cast<double>(s);
      os << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(f.py(v)) << "\" width=\""
         << detail::num(bar) << "\" height=\"" << detail::num(f.py(0) - f.py(v)) << "\" fill=\""
         << detail::kPalette[s % 8] << "\"/>\n";
    }
    os << "<text x=\"" << detail::num(f.px(static_cast<double>(g) + 0.5)) << "\" y=\"" << detail::num(f.py(0) + 16)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << detail::escape(groups[g]) << "</text>\n";
  }
  os << "<line x1=\"" << detail::num(f.left) << "\" y1=\"" << detail::num(f.py(0.05)) << "\" x2=\""
     << detail::num(f.width - f.right) << "\" y2=\"" << detail::num(f.py(0.05))
     << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  detail::legend(os, f, series);
  os << "</svg>\n";
  return os.str();
}

}  // namespace robspat::svg
