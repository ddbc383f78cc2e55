#pragma once

#include <string>
#include <vector>

namespace v2sim {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  ///< draw points instead of a line
};

struct PlotSpec {
  std::string title;
  std::string xLabel;
  std::string yLabel;
  std::vector<PlotSeries> series;
  int widthPx = 720;
  int heightPx = 480;
};

/// Static SVG line plot with linear axes and ticks.
std::string renderSvg(const PlotSpec& spec);
void writeSvgFile(const std::string& path, const PlotSpec& spec);

}  // namespace v2sim
