#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "autowindow/analysis.hpp"

namespace autowindow::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

// Panels stacked vertically, one polyline per series.
std::string line_plot_svg(const std::vector<Panel>& panels);

// One panel per stage of a response sweep.
std::string response_svg(const ResponseCurve& curve);

// Cell colour scales linearly from white (0) to dark blue (1).
std::string heatmap_svg(const Eigen::MatrixXd& values, const std::string& title);

}  // namespace autowindow::plot
