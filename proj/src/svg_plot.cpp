#include "v2sim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace v2sim {

namespace {

constexpr const char* kPalette[] = {"#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555"};
constexpr int kMarginLeft = 80, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 56;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tickLabel(double v, double step) {
  char buf[64];
  const int decimals = step >= 1.0 ? 0 : std::min(6, static_cast<int>(std::ceil(-std::log10(step))));
  std::snprintf(buf, sizeof buf, "%.*f", decimals, std::abs(v) < 1e-12 * step ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double niceStep(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 1e-300) {
      const double d = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string renderSvg(const PlotSpec& spec) {
  Range xr, yr;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has ragged data");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.pad();
  yr.pad();
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double plotW = spec.widthPx - kMarginLeft - kMarginRight;
  const double plotH = spec.heightPx - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plotW; };
  auto py = [&](double y) { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * plotH; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.widthPx << "\" height=\""
     << spec.heightPx << "\" viewBox=\"0 0 " << spec.widthPx << ' ' << spec.heightPx
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << num(plotW)
     << "\" height=\"" << num(plotH) << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = niceStep(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kMarginTop + plotH) << "\" x2=\""
       << num(px(t)) << "\" y2=\"" << num(kMarginTop + plotH + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kMarginTop + plotH + 19)
       << "\" text-anchor=\"middle\">" << tickLabel(t, xs) << "</text>\n";
  }
  const double ys = niceStep(yr.hi - yr.lo, 5);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    os << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(py(t)) << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\">" << tickLabel(t, ys) << "</text>\n";
  }

  os << "<text x=\"" << num(kMarginLeft + plotW / 2) << "\" y=\"" << spec.heightPx - 14
     << "\" text-anchor=\"middle\">" << escape(spec.xLabel) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kMarginTop + plotH / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.yLabel) << "</text>\n";
  os << "<text x=\"" << num(spec.widthPx / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";

  std::size_t colour = 0;
  for (const auto& s : spec.series) {
    const char* stroke = kPalette[colour++ % std::size(kPalette)];
    if (s.markers) {
      os << "<g fill=\"" << stroke << "\">";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2\"/>";
      }
      os << "</g>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      }
      os << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = kMarginTop + 14.0 * static_cast<double>(colour);
      os << "<text x=\"" << num(kMarginLeft + plotW - 6) << "\" y=\"" << num(ly)
         << "\" text-anchor=\"end\" fill=\"" << stroke << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void writeSvgFile(const std::string& path, const PlotSpec& spec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << renderSvg(spec);
}

}  // namespace v2sim
