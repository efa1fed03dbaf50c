#pragma once

#include <string>
#include <utility>
#include <vector>

namespace forestscope {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
};

/// Minimal line plot: axes, ticks, one polyline per series, legend. The
/// output bytes depend only on the chart contents.
std::string render_svg(const Chart& chart);

}  // namespace forestscope
