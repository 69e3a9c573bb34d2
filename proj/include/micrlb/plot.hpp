#pragma once

#include <string>
#include <vector>

namespace micrlb {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // non-finite points are skipped
};

/// Minimal standalone SVG line chart; the y axis is logarithmic when
/// log_y is set (non-positive values are then skipped).
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotSeries>& series, bool log_y);

}  // namespace micrlb
