#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"

namespace saliex {

struct EdgeRefineParams {
    /// Window side; 0 selects max(3, round(min(width, height) / 8)). Even
    /// sides are widened to the next odd value so the window stays centered.
    int window = 0;
    double offset = 0.05;
};

inline int edge_window_side(int width, int height, const EdgeRefineParams& params) {
    int side = params.window > 0
                   ? params.window
                   : std::max(3, static_cast<int>(std::lround(std::min(width, height) / 8.0)));
    if (side % 2 == 0) ++side;
    return side;
}

/// Box mean over a (2r+1)^2 window clipped to the image.
inline RealMap box_mean(const RealMap& map, int radius) {
    const int w = map.width();
    const int h = map.height();
    // Summed-area table with a zero guard row/column.
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += map.at(x, y);
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
        }
    }
    auto at = [&](int x, int y) { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
    RealMap out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(h, y + radius + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(w, x + radius + 1);
            const double sum = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
            out.at(x, y) = sum / static_cast<double>((x1 - x0) * (y1 - y0));
        }
    }
    return out;
}

/// Pixels strictly above their local mean plus `offset`.
inline BinaryMask adaptive_edges(const ProbabilityMap& base, const EdgeRefineParams& params = {}) {
    const int side = edge_window_side(base.width(), base.height(), params);
    const RealMap mean = box_mean(base, side / 2);
    BinaryMask edges(base.width(), base.height());
    for (std::size_t i = 0; i < base.pixel_count(); ++i) edges[i] = base[i] > mean[i] + params.offset ? 1 : 0;
    return edges;
}

/// Regions enclosed by strong edges take the maximum of `base` over the
/// region; everything else is 0.
inline ProbabilityMap refine_by_edges(const ProbabilityMap& base, const RasterImage& img,
                                      const EdgeRefineParams& params = {}) {
    require_same_dims(base, img, "refine_by_edges");
    const BinaryMask filled = fill_enclosed(adaptive_edges(base, params));
    const ComponentLabels cc = connected_components(filled, Connectivity::Eight);
    ProbabilityMap out(base.width(), base.height(), 0.0);
    for (const auto& comp : cc.components) {
        double peak = 0.0;
        for (auto idx : comp.pixels) peak = std::max(peak, base[idx]);
        for (auto idx : comp.pixels) out[idx] = peak;
    }
    return out;
}

} // namespace saliex
