#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gantsne {

// One embedded point ready for plotting. coords has 2 or 3 entries; 3-D data
// is drawn through a fixed orthographic projection (azimuth 45 deg, elevation
// 30 deg, documented in render_svg).
struct ScatterPoint {
    std::vector<double> coords;
    int label = 0;           // selects the 10-color palette entry
    std::string source_tag;  // "real"/"synthetic" select blue/red when color_by_tag
};

struct SvgOptions {
    bool color_by_tag = false; // compare mode: blue = real, red = synthetic
};

// Deterministic scatter SVG: 800 x 800 canvas, 40 px margins, radius-3
// circles, tight bounding box scaling; a lone point (or a degenerate axis)
// maps to the canvas center. Same input always yields byte-identical files.
void render_svg(const std::vector<ScatterPoint>& points,
                const std::filesystem::path& out,
                const SvgOptions& options = {});

// Width/height of the fixed canvas, exposed for tests.
inline constexpr double kSvgCanvas = 800.0;
inline constexpr double kSvgMargin = 40.0;

} // namespace gantsne
