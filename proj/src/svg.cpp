#include "qlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace qlab {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

}  // namespace

void svg_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                   const std::string& x_label, const std::string& y_label, bool log_x,
                   bool log_y) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
            ymin = std::min(ymin, ty(y));
            ymax = std::max(ymax, ty(y));
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (ty(y) - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (W / 2) << "\" y=\"" << H - 12 << "\" font-size=\"13\">" << x_label
        << (log_x ? " (log)" : "") << "</text>\n";
    out << "<text x=\"14\" y=\"" << (H / 2) << "\" font-size=\"13\" transform=\"rotate(-90 14 "
        << (H / 2) << ")\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";
    double legend_y = mt + 14;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) out << num(px(x)) << "," << num(py(y)) << " ";
        out << "\"/>\n";
        for (const auto& [x, y] : s.points)
            out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
                << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
        if (!s.label.empty()) {
            out << "<text x=\"" << W - mr - 180 << "\" y=\"" << legend_y
                << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
}

void svg_cube_tree(const std::string& path, const CubeTree& tree) {
    if (tree.m() != 2) throw std::runtime_error("svg_cube_tree: m = 2 only");
    const double W = 640;
    const double scale = W / 8.0;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W
        << "\" viewBox=\"0 0 " << W << " " << W << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << W << "\" fill=\"white\"/>\n";
    for (int level = tree.params().N0; level <= tree.max_depth(); ++level) {
        for (const auto& [key, cls] : tree.level_cubes(level)) {
            const DyadicCube cube = tree.cube(key);
            const char* fill = "#eeeeee";
            switch (cls) {
                case CubeClass::We: fill = "#d7504b"; break;
                case CubeClass::Wh: fill = "#e9a13b"; break;
                case CubeClass::Wn: fill = "#8cc665"; break;
                case CubeClass::Unresolved: fill = "#4a78c2"; break;
                default: continue;  // S cubes refine; draw leaves only
            }
            const double x = (cube.center[0] - cube.half_side + 4.0) * scale;
            const double y = (4.0 - cube.center[1] - cube.half_side) * scale;
            const double s = 2.0 * cube.half_side * scale;
            out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(s)
                << "\" height=\"" << num(s) << "\" fill=\"" << fill
                << "\" stroke=\"#555555\" stroke-width=\"0.4\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace qlab
