#include "hessianlab/runio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hessianlab {

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << (i ? "," : "") << columns[i];
    os << "\n";
    os.precision(17);
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("write_csv: row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& title, bool log_y) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("svg_line_plot: bad series");
    std::vector<double> y = ys;
    if (log_y) {
        double floor_v = std::numeric_limits<double>::infinity();
        for (double v : y)
            if (v > 0.0) floor_v = std::min(floor_v, v);
        if (!std::isfinite(floor_v)) floor_v = 1e-300;
        for (double& v : y) v = std::log10(std::max(v, floor_v));
    }
    double x0 = *std::min_element(xs.begin(), xs.end());
    double x1 = *std::max_element(xs.begin(), xs.end());
    double y0 = *std::min_element(y.begin(), y.end());
    double y1 = *std::max_element(y.begin(), y.end());
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    const double W = 640, H = 400, m = 50; // canvas and margin
    auto px = [&](double v) { return m + (v - x0) / (x1 - x0) * (W - 2 * m); };
    auto py = [&](double v) { return H - m - (v - y0) / (y1 - y0) * (H - 2 * m); };
    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\">\n<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m
       << "\" height=\"" << H - 2 * m << "\" fill=\"none\" stroke=\"black\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"" << m / 2
       << "\" text-anchor=\"middle\" font-size=\"14\">" << title << (log_y ? " (log10)" : "")
       << "</text>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << (i ? " " : "") << px(xs[i]) << "," << py(y[i]);
    os << "\"/>\n</svg>\n";
    return os.str();
}

void write_svg_plot(const std::string& path, const std::vector<double>& xs,
                    const std::vector<double>& ys, const std::string& title, bool log_y) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << svg_line_plot(xs, ys, title, log_y);
}

} // namespace hessianlab
