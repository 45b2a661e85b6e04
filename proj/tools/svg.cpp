#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace levisim::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

struct Axis {
  double lo;
  double hi;
  bool log;
  double pixel_lo;
  double pixel_hi;

  double map(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
      }
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (auto k = static_cast<long>(std::ceil(lo / step)); k * step <= hi + 1e-9 * span; ++k) {
      out.push_back(static_cast<double>(k) * step);
    }
    return out;
  }
};

Axis make_axis(std::vector<double> v, bool log, double p0, double p1) {
  if (log) v.erase(std::remove_if(v.begin(), v.end(), [](double a) { return !(a > 0.0); }), v.end());
  v.erase(std::remove_if(v.begin(), v.end(), [](double a) { return !std::isfinite(a); }), v.end());
  double lo = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
  double hi = v.empty() ? 1.0 : *std::max_element(v.begin(), v.end());
  if (log) {
    if (v.empty()) {
      lo = 1.0;
      hi = 10.0;
    }
    if (hi <= lo) hi = lo * 10.0;
  } else if (hi <= lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log, p0, p1};
}

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      kWidth, kHeight, (kLeft + kWidth - kRight) / 2.0, escape(title));
}

std::string axes(const Axis& ax, const Axis& ay, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                   kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  for (const double t : ax.ticks()) {
    const double px = ax.map(t);
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n", px,
                     kHeight - kBottom, kHeight - kBottom + 5);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px,
                     kHeight - kBottom + 18, t);
  }
  for (const double t : ay.ticks()) {
    const double py = ay.map(t);
    s += fmt::format("<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                     kLeft - 5, kLeft, py);
    s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 8,
                     py + 4, t);
  }
  s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                   (kLeft + kWidth - kRight) / 2.0, kHeight - 20, escape(xlabel));
  s += fmt::format(
      "<text x=\"20\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0:.1f})\">{1}</text>\n",
      (kTop + kHeight - kBottom) / 2.0, escape(ylabel));
  return s;
}

}  // namespace

std::string LinePlot::render() const {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, logx, kLeft, kWidth - kRight);
  const Axis ay = make_axis(ys, logy, kHeight - kBottom, kTop);
  std::string out = header(title) + axes(ax, ay, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((logx && !(s.x[i] > 0.0)) || (logy && !(s.y[i] > 0.0))) continue;
      pts += fmt::format("{:.2f},{:.2f} ", ax.map(s.x[i]), ay.map(s.y[i]));
      if (s.markers) {
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", ax.map(s.x[i]),
                           ay.map(s.y[i]), colour);
      }
    }
    if (!s.markers) {
      out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                         colour, pts);
    }
    const double ly = kTop + 16.0 * static_cast<double>(k) + 10.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kWidth - kRight + 10, ly, kWidth - kRight + 30, colour);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 35, ly + 4, escape(s.label));
  }
  return out + "</svg>\n";
}

std::string HeatMap::render() const {
  const Axis ax = make_axis(x, false, kLeft, kWidth - kRight);
  const Axis ay = make_axis(y, false, kHeight - kBottom, kTop);
  double vmax = 0.0;
  for (const auto& row : values)
    for (const double v : row)
      if (std::isfinite(v)) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  std::string out = header(title);
  const double cw = x.size() > 1 ? std::abs(ax.map(x[1]) - ax.map(x[0])) : 10.0;
  const double ch = y.size() > 1 ? std::abs(ay.map(y[1]) - ay.map(y[0])) : 10.0;
  for (std::size_t i = 0; i < x.size() && i < values.size(); ++i) {
    for (std::size_t j = 0; j < y.size() && j < values[i].size(); ++j) {
      const double t = std::clamp(values[i][j] / vmax, 0.0, 1.0);
      const int r = static_cast<int>(std::lround(255.0 * std::min(1.0, 2.0 * t)));
      const int g = static_cast<int>(std::lround(255.0 * std::max(0.0, 2.0 * t - 1.0)));
      const int b = static_cast<int>(std::lround(96.0 * (1.0 - t)));
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n",
          ax.map(x[i]) - cw / 2.0, ay.map(y[j]) - ch / 2.0, cw + 0.5, ch + 0.5, r, g, b);
    }
  }
  return out + axes(ax, ay, xlabel, ylabel) + "</svg>\n";
}

}  // namespace levisim::cli
