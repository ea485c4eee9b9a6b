#include "critmet/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace critmet::plot {

namespace {

const double kWidth = 640.0;
const double kPanelHeight = 220.0;
const double kLeft = 80.0;
const double kRight = 20.0;
const double kTop = 40.0;
const double kGap = 50.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string escape(std::string_view s) {
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

}  // namespace

std::string stacked_line_plot(std::string_view title, std::string_view xlabel,
                              const std::vector<double>& x, const std::vector<Panel>& panels) {
  const double height = kTop + panels.size() * (kPanelHeight + kGap) + 10.0;
  const double plot_w = kWidth - kLeft - kRight;
  Range xr;
  for (double v : x) xr.add(v);
  xr.pad();

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{:.1f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
      kWidth, height, kWidth / 2, escape(title));

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const Panel& panel = panels[k];
    const double top = kTop + k * (kPanelHeight + kGap);
    Range yr;
    for (double v : panel.y) yr.add(v);
    yr.pad();
    const auto px = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    const auto py = [&](double v) {
      return top + kPanelHeight - (v - yr.lo) / (yr.hi - yr.lo) * kPanelHeight;
    };

    svg += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
        "stroke=\"black\"/>\n",
        kLeft, top, plot_w, kPanelHeight);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                       kLeft - 4, top + 10, yr.hi);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                       kLeft - 4, top + kPanelHeight, yr.lo);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kLeft + 6, top + 16,
                       escape(panel.ylabel));
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"start\">{:.4g}</text>\n",
                       kLeft, top + kPanelHeight + 16, xr.lo);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                       kLeft + plot_w, top + kPanelHeight + 16, xr.hi);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + plot_w / 2, top + kPanelHeight + 16, escape(xlabel));

    std::string path;
    bool pen_down = false;
    const std::size_t n = std::min(x.size(), panel.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(panel.y[i])) {
        pen_down = false;
        continue;
      }
      path += fmt::format("{}{:.2f},{:.2f} ", pen_down ? "L" : "M", px(x[i]), py(panel.y[i]));
      pen_down = true;
    }
    svg += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\"/>\n",
                       path);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace critmet::plot
