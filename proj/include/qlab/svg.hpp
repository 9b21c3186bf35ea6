#pragma once

#include <string>
#include <vector>

#include "qlab/common.hpp"
#include "qlab/whitney.hpp"

namespace qlab {

// Minimal deterministic SVG writers for diffable golden files.

struct PlotSeries {
    std::string label;
    std::string color = "#1f6fb2";
    std::vector<std::pair<double, double>> points;
};

// log-log or linear line plot of one or more series
void svg_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                   const std::string& x_label, const std::string& y_label, bool log_x = false,
                   bool log_y = false);

// cube decomposition with class coloring (m = 2 trees)
void svg_cube_tree(const std::string& path, const CubeTree& tree);

}  // namespace qlab
