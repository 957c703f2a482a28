#include "gantsne/svg.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "gantsne/dataset.hpp"
#include "gantsne/errors.hpp"

namespace gantsne {

namespace {

// Fixed 10-color palette indexed by digit label.
constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr const char* kRealColor = "#1f77b4";      // blue
constexpr const char* kSyntheticColor = "#d62728"; // red
constexpr const char* kOtherColor = "#7f7f7f";

// Orthographic camera looking at the origin from azimuth 45 deg, elevation
// 30 deg: screen x = p . right, screen y = p . up with
//   right = (-sin a, cos a, 0)
//   up    = (-cos a sin e, -sin a sin e, cos e)
std::pair<double, double> project(const std::vector<double>& c) {
    if (c.size() == 2) return {c[0], c[1]};
    const double sin_a = std::sqrt(0.5), cos_a = std::sqrt(0.5);
    const double sin_e = 0.5, cos_e = std::sqrt(3.0) / 2.0;
    const double x = -sin_a * c[0] + cos_a * c[1];
    const double y = -cos_a * sin_e * c[0] - sin_a * sin_e * c[1] + cos_e * c[2];
    return {x, y};
}

const char* point_color(const ScatterPoint& p, const SvgOptions& options) {
    if (options.color_by_tag) {
        if (p.source_tag == "real") return kRealColor;
        if (p.source_tag == "synthetic") return kSyntheticColor;
        return kOtherColor;
    }
    int idx = p.label % 10;
    if (idx < 0) idx += 10;
    return kPalette[static_cast<std::size_t>(idx)];
}

} // namespace

void render_svg(const std::vector<ScatterPoint>& points,
                const std::filesystem::path& out, const SvgOptions& options) {
    const std::size_t dims = points.empty() ? 2 : points.front().coords.size();
    if (dims != 2 && dims != 3) {
        throw InputError("render_svg: points must be 2-D or 3-D");
    }
    std::vector<std::pair<double, double>> projected;
    projected.reserve(points.size());
    for (const auto& p : points) {
        if (p.coords.size() != dims) {
            throw InputError("render_svg: mixed point dimensions");
        }
        projected.push_back(project(p.coords));
    }

    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    bool first = true;
    for (const auto& [x, y] : projected) {
        if (first) {
            x_min = x_max = x;
            y_min = y_max = y;
            first = false;
        } else {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }

    const double span = kSvgCanvas - 2.0 * kSvgMargin;
    // A degenerate axis (single point or zero extent) maps to the canvas
    // center instead of dividing by zero.
    const auto place = [&](double v, double lo, double hi) {
        if (hi <= lo) return kSvgCanvas / 2.0;
        return kSvgMargin + (v - lo) / (hi - lo) * span;
    };

    std::ofstream file(out);
    if (!file) throw InputError("cannot open " + out.string() + " for writing");
    file << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    file << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(kSvgCanvas)
         << "\" height=\"" << format_double(kSvgCanvas) << "\" viewBox=\"0 0 "
         << format_double(kSvgCanvas) << " " << format_double(kSvgCanvas) << "\">\n";
    file << "<rect x=\"" << format_double(kSvgMargin) << "\" y=\"" << format_double(kSvgMargin)
         << "\" width=\"" << format_double(span) << "\" height=\"" << format_double(span)
         << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double cx = place(projected[i].first, x_min, x_max);
        // SVG y grows downward; flip so larger data y plots higher.
        const double cy = kSvgCanvas - place(projected[i].second, y_min, y_max);
        file << "<circle cx=\"" << format_double(cx) << "\" cy=\"" << format_double(cy)
             << "\" r=\"3\" fill=\"" << point_color(points[i], options) << "\"/>\n";
    }
    file << "</svg>\n";
}

} // namespace gantsne
