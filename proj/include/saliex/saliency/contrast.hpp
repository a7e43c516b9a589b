#pragma once

#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"

namespace saliex {

struct ContrastParams {
    int levels = 6;
};

/// Working image sizes of the halving pyramid: each level floors both sides by
/// two and the pyramid stops before either side would drop below 3.
inline std::vector<std::pair<int, int>> pyramid_sizes(int width, int height, int levels) {
    std::vector<std::pair<int, int>> sizes;
    int w = width;
    int h = height;
    for (int l = 0; l < levels; ++l) {
        if (w < 3 || h < 3) break;
        sizes.emplace_back(w, h);
        w /= 2;
        h /= 2;
    }
    return sizes;
}

/// Sum over the 3x3 window of squared differences to the center. Border
/// pixels stay 0.
inline RealMap local_contrast(const RealMap& gray) {
    RealMap out(gray.width(), gray.height(), 0.0);
    for (int y = 1; y + 1 < gray.height(); ++y) {
        for (int x = 1; x + 1 < gray.width(); ++x) {
            const double center = gray.at(x, y);
            double sum = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double d = center - gray.at(x + dx, y + dy);
                    sum += d * d;
                }
            }
            out.at(x, y) = sum;
        }
    }
    return out;
}

/// Accumulated (unnormalized) contrast over all pyramid levels, each level
/// resized back to the input size.
inline RealMap multiscale_contrast_raw(const RasterImage& img, const ContrastParams& params = {}) {
    if (img.width() < 3 || img.height() < 3) fail(ErrorCode::ImageTooSmall, "multi-scale contrast needs at least 3x3");
    if (params.levels < 1) fail(ErrorCode::InvalidValue, "pyramid levels must be >= 1");

    RealMap level = to_real(to_luminance(img));
    RealMap acc(img.width(), img.height(), 0.0);
    const auto sizes = pyramid_sizes(img.width(), img.height(), params.levels);
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        if (l > 0) level = resize_bilinear(level, sizes[l].first, sizes[l].second);
        const RealMap contrast = resize_bilinear(local_contrast(level), img.width(), img.height());
        for (std::size_t i = 0; i < acc.pixel_count(); ++i) acc[i] += contrast[i];
    }
    return acc;
}

inline ProbabilityMap multiscale_contrast(const RasterImage& img, const ContrastParams& params = {}) {
    return normalize_unit(multiscale_contrast_raw(img, params));
}

} // namespace saliex
