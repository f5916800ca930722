#include "netsysid/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <vector>

namespace netsysid {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Curve {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (samples, mean error)
};

std::vector<Curve> aggregate(std::span<const ErrorTrace> traces) {
  std::vector<Curve> curves;
  std::vector<std::map<long long, std::pair<double, long long>>> sums;
  auto curve_index = [&](const std::string& label) {
    for (size_t i = 0; i < curves.size(); ++i)
      if (curves[i].label == label) return i;
    curves.push_back({label, {}});
    sums.emplace_back();
    return curves.size() - 1;
  };
  for (const ErrorTrace& trace : traces) {
    size_t idx = curve_index(trace.label);
    for (const TraceRow& row : trace.rows) {
      auto& acc = sums[idx][row.samples];
      acc.first += row.error;
      acc.second += 1;
    }
  }
  for (size_t i = 0; i < curves.size(); ++i)
    for (const auto& [samples, acc] : sums[i])
      curves[i].points.emplace_back(double(samples), acc.first / double(acc.second));
  return curves;
}

}  // namespace

std::string emit_plot(std::span<const ErrorTrace> traces, const PlotStyle& style) {
  if (traces.empty()) throw std::invalid_argument("emit_plot: no traces");
  std::vector<Curve> curves = aggregate(traces);

  double x_max = 0.0;
  double y_min = 1e300, y_max = 0.0;
  for (const Curve& c : curves)
    for (auto [x, y] : c.points) {
      x_max = std::max(x_max, x);
      if (y > 0.0) {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  if (y_max == 0.0) {
    // All-zero errors: pin an arbitrary positive window.
    y_min = 1e-16;
    y_max = 1.0;
  }
  double log_lo = std::floor(std::log10(y_min));
  double log_hi = std::ceil(std::log10(y_max));
  if (log_hi <= log_lo) log_hi = log_lo + 1.0;
  if (x_max <= 0.0) x_max = 1.0;

  const double ml = 70, mr = 16, mt = 34, mb = 46;
  const double pw = style.width - ml - mr;
  const double ph = style.height - mt - mb;
  auto x_pos = [&](double x) { return ml + pw * (x / x_max); };
  auto y_pos = [&](double y) {
    double ly = std::log10(std::max(y, std::pow(10.0, log_lo)));
    return mt + ph * (1.0 - (ly - log_lo) / (log_hi - log_lo));
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
         "\" height=\"" + std::to_string(style.height) + "\" viewBox=\"0 0 " +
         std::to_string(style.width) + " " + std::to_string(style.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + style.title + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
         fmt(mt + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(ml + pw) +
         "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"black\"/>\n";

  for (double e = log_lo; e <= log_hi + 0.5; e += 1.0) {
    double y = y_pos(std::pow(10.0, e));
    svg += "<line x1=\"" + fmt(ml - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(y) + "\" stroke=\"#dddddd\"/>\n";
    char lab[32];
    std::snprintf(lab, sizeof(lab), "1e%d", int(e));
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + lab + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    double x = x_max * double(i) / 5.0;
    double px = x_pos(x);
    svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(px) +
           "\" y2=\"" + fmt(mt + ph + 4) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(mt + ph + 18) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + fmt(x) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(double(style.height) - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         style.x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fmt(mt + ph / 2) + ")\">" + style.y_label + "</text>\n";

  // Curves, in group order.
  for (size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    const Curve& c = curves[i];
    if (c.points.size() >= 2) {
      svg += "<polyline fill=\"none\" stroke=\"";
      svg += color;
      svg += "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : c.points) svg += fmt(x_pos(x)) + "," + fmt(y_pos(y)) + " ";
      svg += "\"/>\n";
    }
    if (c.points.size() <= 2) {
      for (auto [x, y] : c.points)
        svg += "<circle cx=\"" + fmt(x_pos(x)) + "\" cy=\"" + fmt(y_pos(y)) +
               "\" r=\"3.5\" fill=\"" + std::string(color) + "\"/>\n";
    }
  }

  // Legend.
  double lx = ml + pw - 150, ly = mt + 10;
  for (size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    double y = ly + double(i) * 18;
    svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(lx + 22) +
           "\" y2=\"" + fmt(y) + "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(lx + 28) + "\" y=\"" + fmt(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + curves[i].label + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace netsysid
