#pragma once

#include <string>
#include <vector>

namespace hessianlab {

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Minimal line plot (one polyline, axis box, title); log_y clamps
/// nonpositive values to the smallest positive sample.
std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& title, bool log_y = false);

void write_svg_plot(const std::string& path, const std::vector<double>& xs,
                    const std::vector<double>& ys, const std::string& title, bool log_y = false);

} // namespace hessianlab
