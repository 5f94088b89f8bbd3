#include "localmart/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace localmart {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
     << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
  const double bx = kLeft, by = kHeight - kBottom, tx = kWidth - kRight, ty = kTop;
  os << "<rect x=\"" << bx << "\" y=\"" << ty << "\" width=\"" << tx - bx << "\" height=\"" << by - ty
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << by + 16 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    os << "<text x=\"" << bx - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  os << "<text x=\"" << (bx + tx) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << esc(xl)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (by + ty) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (by + ty) / 2 << ")\">" << esc(yl) << "</text>\n";
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const Frame f = make_frame(x0, x1, y0, y1);

  std::ostringstream os;
  header(os, title);
  axes(os, f, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << f.px(s.x[i]) << "," << f.py(s.y[i]) << " ";
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << "<circle cx=\"" << f.px(s.x[i]) << "\" cy=\"" << f.py(s.y[i]) << "\" r=\"2.5\" fill=\"" << color
         << "\"/>\n";
      if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0) {
        os << "<line x1=\"" << f.px(s.x[i]) << "\" x2=\"" << f.px(s.x[i]) << "\" y1=\"" << f.py(s.y[i] - s.err[i])
           << "\" y2=\"" << f.py(s.y[i] + s.err[i]) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    os << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 14 * k << "\" text-anchor=\"end\" fill=\""
       << color << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram(const std::string& title, const std::string& x_label, const std::vector<double>& values,
                          std::size_t bins) {
  bins = std::max<std::size_t>(1, bins);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    counts[std::min(b, bins - 1)]++;
  }
  const double top = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const Frame f{lo, hi, 0.0, std::max(1.0, top) * 1.05};

  std::ostringstream os;
  header(os, title);
  axes(os, f, x_label, "count");
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    if (!counts[b]) continue;
    const double xa = f.px(lo + w * static_cast<double>(b));
    const double xb = f.px(lo + w * static_cast<double>(b + 1));
    const double ya = f.py(static_cast<double>(counts[b]));
    os << "<rect x=\"" << xa << "\" y=\"" << ya << "\" width=\"" << std::max(0.5, xb - xa - 1) << "\" height=\""
       << f.py(0) - ya << "\" fill=\"" << kColors[0] << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace localmart
