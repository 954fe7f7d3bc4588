#pragma once

#include <span>
#include <string>
#include <vector>

namespace lfgp {

/// One polyline of a chart.
struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color; // empty -> palette color by position
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    double width = 880;
    double height = 540;
};

/// Self-contained SVG line chart: axes with rounded ticks, one polyline per
/// series, inline legend. No external dependencies, deterministic output.
std::string render_line_chart(const ChartSpec& spec, std::span<const LineSeries> series);
void write_line_chart(const std::string& path, const ChartSpec& spec,
                      std::span<const LineSeries> series);

} // namespace lfgp
