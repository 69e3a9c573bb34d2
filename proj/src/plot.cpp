#include "micrlb/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace micrlb {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<PlotSeries>& series, bool log_y) {
    const auto usable = [&](double y) { return std::isfinite(y) && (!log_y || y > 0.0); };
    const auto ty = [&](double y) { return log_y ? std::log10(y) : y; };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!usable(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
        "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       kLeft + pw / 2.0, escape(title));
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 5.0;
        const double yv = ymin + (ymax - ymin) * t / 5.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px(xv),
                           kTop + ph + 18.0, xv);
        const std::string ylab = log_y ? fmt::format("1e{:.2f}", yv) : fmt::format("{:.3g}", yv);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6.0,
                           py(yv) + 4.0, ylab);
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft,
                           py(yv), kLeft + pw, py(yv));
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2.0,
                       kHeight - 16.0, escape(x_label));
    svg += fmt::format(
        "<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        kTop + ph / 2.0, kTop + ph / 2.0, escape(y_label + (log_y ? " (log10)" : "")));

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % std::size(kColors)];
        std::string points;
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
            if (!usable(series[s].y[i])) continue;
            const double x = px(series[s].x[i]);
            const double y = py(ty(series[s].y[i]));
            points += fmt::format("{:.2f},{:.2f} ", x, y);
            svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", x, y, color);
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
                           points);
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(s);
        svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           kWidth - kRight + 12.0, ly, kWidth - kRight + 36.0, ly, color);
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 42.0, ly + 4.0,
                           escape(series[s].label));
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace micrlb
