#include "lfgp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lfgp {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Tick step of the form {1, 2, 5} * 10^k giving roughly `target` intervals.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mult * mag >= raw) return mult * mag;
    }
    return 10.0 * mag;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_line_chart(const ChartSpec& spec, std::span<const LineSeries> series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const LineSeries& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("LineSeries: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double left = 64, right = 18, top = 34, bottom = 46;
    const double W = spec.width, H = spec.height;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(W) << "' height='" << num(H)
        << "' viewBox='0 0 " << num(W) << " " << num(H) << "'>\n";
    svg << "<rect x='0' y='0' width='" << num(W) << "' height='" << num(H)
        << "' fill='white' stroke='none'/>\n";
    if (!spec.title.empty())
        svg << "<text x='" << num(W / 2) << "' y='20' text-anchor='middle' font-family='sans-serif'"
            << " font-size='14'>" << escape_xml(spec.title) << "</text>\n";

    // Grid and ticks.
    const double xstep = nice_step(xmax - xmin, 6);
    const double ystep = nice_step(ymax - ymin, 6);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
        svg << "<line x1='" << num(sx(t)) << "' y1='" << num(top) << "' x2='" << num(sx(t))
            << "' y2='" << num(H - bottom) << "' stroke='#dddddd' stroke-width='1'/>\n";
        svg << "<text x='" << num(sx(t)) << "' y='" << num(H - bottom + 16)
            << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << num(t)
            << "</text>\n";
    }
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
        svg << "<line x1='" << num(left) << "' y1='" << num(sy(t)) << "' x2='" << num(W - right)
            << "' y2='" << num(sy(t)) << "' stroke='#dddddd' stroke-width='1'/>\n";
        svg << "<text x='" << num(left - 6) << "' y='" << num(sy(t) + 4)
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << num(t)
            << "</text>\n";
    }
    svg << "<line x1='" << num(left) << "' y1='" << num(top) << "' x2='" << num(left) << "' y2='"
        << num(H - bottom) << "' stroke='black' stroke-width='1'/>\n";
    svg << "<line x1='" << num(left) << "' y1='" << num(H - bottom) << "' x2='" << num(W - right)
        << "' y2='" << num(H - bottom) << "' stroke='black' stroke-width='1'/>\n";
    if (!spec.x_label.empty())
        svg << "<text x='" << num(left + pw / 2) << "' y='" << num(H - 10)
            << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
            << escape_xml(spec.x_label) << "</text>\n";
    if (!spec.y_label.empty())
        svg << "<text x='14' y='" << num(top + ph / 2) << "' text-anchor='middle'"
            << " font-family='sans-serif' font-size='12' transform='rotate(-90 14 "
            << num(top + ph / 2) << ")'>" << escape_xml(spec.y_label) << "</text>\n";

    std::size_t si = 0;
    for (const LineSeries& s : series) {
        const std::string color =
            s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
        svg << "'/>\n";
        const double ly = top + 16 + 16 * static_cast<double>(si);
        svg << "<line x1='" << num(W - right - 120) << "' y1='" << num(ly) << "' x2='"
            << num(W - right - 96) << "' y2='" << num(ly) << "' stroke='" << color
            << "' stroke-width='2'/>\n";
        svg << "<text x='" << num(W - right - 90) << "' y='" << num(ly + 4)
            << "' font-family='sans-serif' font-size='11'>" << escape_xml(s.label) << "</text>\n";
        ++si;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_line_chart(const std::string& path, const ChartSpec& spec,
                      std::span<const LineSeries> series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render_line_chart(spec, series);
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace lfgp
