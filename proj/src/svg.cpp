#include "mirrornoise/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mirrornoise/error.hpp"

namespace mirrornoise {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
constexpr double kLeft = 78, kRight = 20, kTop = 34, kBottom = 52;

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double norm(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Axis make_axis(const std::vector<double>& values, bool log, const std::string& what) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (log && v <= 0) throw Error(ErrorKind::InvalidInput, what + ": log axis needs positive values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) throw Error(ErrorKind::InvalidInput, what + ": no finite values");
  Axis a;
  a.log = log;
  if (log) {
    a.lo = std::pow(10.0, std::floor(std::log10(lo)));
    a.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (a.hi <= a.lo) a.hi = a.lo * 10.0;
  } else {
    const double span = hi - lo;
    const double pad = span > 0 ? 0.05 * span : (lo != 0 ? 0.1 * std::fabs(lo) : 1.0);
    a.lo = lo - pad;
    a.hi = hi + pad;
  }
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    const int d0 = static_cast<int>(std::lround(std::log10(a.lo)));
    const int d1 = static_cast<int>(std::lround(std::log10(a.hi)));
    for (int d = d0; d <= d1; ++d) t.push_back(std::pow(10.0, d));
    return t;
  }
  const double raw = (a.hi - a.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
    t.push_back(std::fabs(v) < 1e-12 * step ? 0.0 : v);
  }
  return t;
}

std::string tick_label(double v, bool log) {
  if (log) return "1e" + std::to_string(static_cast<int>(std::lround(std::log10(v))));
  return fmt("%g", v);
}

}  // namespace

std::string emit_svg(const Table& t, const PlotSpec& spec) {
  if (t.rows.size() < 2) throw Error(ErrorKind::InvalidInput, "plot needs at least 2 rows");
  if (spec.y.empty()) throw Error(ErrorKind::Usage, "plot needs at least one y column");
  const std::vector<double> xs = t.column(spec.x);
  std::vector<std::vector<double>> ys;
  std::vector<double> all_y;
  for (const auto& name : spec.y) {
    ys.push_back(t.column(name));
    all_y.insert(all_y.end(), ys.back().begin(), ys.back().end());
  }
  const Axis ax = make_axis(xs, spec.log_x, "x");
  const Axis ay = make_axis(all_y, spec.log_y, "y");

  const double w = spec.width, h = spec.height;
  const double pw = w - kLeft - kRight, ph = h - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.norm(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.norm(v)) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
       std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
       std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    s += "<text x=\"" + fmt("%.2f", w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" +
         escape(spec.title) + "</text>\n";
  }

  // Grid and tick labels.
  s += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double v : ticks(ax)) {
    const std::string x = fmt("%.2f", px(v));
    s += "<line x1=\"" + x + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + x + "\" y2=\"" + fmt("%.2f", kTop + ph) + "\"/>\n";
  }
  for (double v : ticks(ay)) {
    const std::string y = fmt("%.2f", py(v));
    s += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + y + "\" x2=\"" + fmt("%.2f", kLeft + pw) + "\" y2=\"" + y + "\"/>\n";
  }
  s += "</g>\n<g fill=\"black\">\n";
  for (double v : ticks(ax)) {
    s += "<text x=\"" + fmt("%.2f", px(v)) + "\" y=\"" + fmt("%.2f", kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         tick_label(v, ax.log) + "</text>\n";
  }
  for (double v : ticks(ay)) {
    s += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", py(v) + 4) + "\" text-anchor=\"end\">" +
         tick_label(v, ay.log) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", h - 12) + "\" text-anchor=\"middle\">" +
       escape(spec.x) + "</text>\n";
  s += "</g>\n";
  s += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" + fmt("%.2f", pw) +
       "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (std::size_t k = 0; k < ys.size(); ++k) {
    const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[k][i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(xs[i])) + "," + fmt("%.2f", py(ys[k][i]));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 14 + 14.0 * static_cast<double>(k);
    s += "<line x1=\"" + fmt("%.2f", kLeft + pw - 120) + "\" y1=\"" + fmt("%.2f", ly - 4) + "\" x2=\"" +
         fmt("%.2f", kLeft + pw - 100) + "\" y2=\"" + fmt("%.2f", ly - 4) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.2f", kLeft + pw - 95) + "\" y=\"" + fmt("%.2f", ly) + "\">" + escape(spec.y[k]) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace mirrornoise
