#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace critmet::plot {

struct Panel {
  std::string ylabel;
  std::vector<double> y;
};

// Standalone SVG with one line panel per y column, stacked vertically and
// sharing the x axis. Non-finite points break the line.
std::string stacked_line_plot(std::string_view title, std::string_view xlabel,
                              const std::vector<double>& x, const std::vector<Panel>& panels);

}  // namespace critmet::plot
