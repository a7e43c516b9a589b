#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"
#include "saliex/saliency/gmm.hpp"
#include "saliex/saliency/hull.hpp"

namespace saliex {

struct ColorSpatialParams {
    int components = 5;
    std::uint64_t seed = 42;
    int em_iterations = 50;
    double variance_floor = 1e-4;
};

inline std::vector<Color3> color_samples(const RasterImage& img) {
    std::vector<Color3> samples(img.pixel_count());
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        samples[i] = {img[3 * i] / 255.0, img[3 * i + 1] / 255.0, img[3 * i + 2] / 255.0};
    return samples;
}

/// Responsibility-weighted variance of pixel x plus that of pixel y, per
/// component.
inline std::vector<double> spatial_variances(const GmmColorModel& model, int width, int height) {
    const int comps = model.components();
    std::vector<double> variance(static_cast<std::size_t>(comps), 0.0);
    for (int c = 0; c < comps; ++c) {
        double mass = 0.0;
        double mx = 0.0;
        double my = 0.0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double r = model.responsibility(static_cast<std::size_t>(y) * width + x, c);
                mass += r;
                mx += r * x;
                my += r * y;
            }
        if (mass <= 0.0) {
            variance[static_cast<std::size_t>(c)] = -1.0; // resolved to the maximum below
            continue;
        }
        mx /= mass;
        my /= mass;
        double vx = 0.0;
        double vy = 0.0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double r = model.responsibility(static_cast<std::size_t>(y) * width + x, c);
                vx += r * (x - mx) * (x - mx);
                vy += r * (y - my) * (y - my);
            }
        variance[static_cast<std::size_t>(c)] = (vx + vy) / mass;
    }
    const double top = *std::max_element(variance.begin(), variance.end());
    for (double& v : variance)
        if (v < 0.0) v = std::max(top, 0.0);
    return variance;
}

/// Colors that are spatially compact score high: f(x) = sum_c p(c|x)(1 - V(c))
/// with V min-max normalized over components.
inline ProbabilityMap color_spatial_distribution(const RasterImage& img, const ColorSpatialParams& p = {}) {
    GmmOptions opt;
    opt.components = std::max(1, p.components);
    opt.seed = p.seed;
    opt.em_iterations = p.em_iterations;
    opt.variance_floor = p.variance_floor;
    const GmmColorModel model = fit_gmm(color_samples(img), opt);

    std::vector<double> variance = spatial_variances(model, img.width(), img.height());
    const auto [lo_it, hi_it] = std::minmax_element(variance.begin(), variance.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    for (double& v : variance) v = range > 0.0 ? (v - lo) / range : 0.0;

    RealMap raw(img.width(), img.height(), 0.0);
    const int comps = model.components();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        double s = 0.0;
        for (int c = 0; c < comps; ++c) s += model.responsibility(i, c) * (1.0 - variance[static_cast<std::size_t>(c)]);
        raw[i] = s;
    }
    return normalize_unit(raw);
}

// ---------------------------------------------------------------------------

struct SpatialRefineParams {
    std::size_t max_hull_points = 1024;
    double hull_volume_floor = 1.0;
};

/// RGB hull volume of a pixel set, sampled with a uniform stride so at most
/// max_hull_points colors enter the hull. Flat hulls get the floor volume.
inline double color_richness(const RasterImage& img, const std::vector<std::size_t>& pixels,
                             const SpatialRefineParams& p = {}) {
    const std::size_t step = std::max<std::size_t>(1, (pixels.size() + p.max_hull_points - 1) / p.max_hull_points);
    std::vector<IPoint3> pts;
    pts.reserve(pixels.size() / step + 1);
    for (std::size_t k = 0; k < pixels.size(); k += step) {
        const std::size_t i = pixels[k];
        pts.push_back({img[3 * i], img[3 * i + 1], img[3 * i + 2]});
    }
    return std::max(p.hull_volume_floor, convex_hull_volume(std::move(pts)));
}

/// Keeps the single connected blob scoring highest on area x color hull
/// volume and paints it with the mean of `base` over the blob.
inline ProbabilityMap refine_spatial_distribution(const ProbabilityMap& base, const RasterImage& img,
                                                  const SpatialRefineParams& p = {}) {
    require_same_dims(base, img, "refine_spatial_distribution");
    const LuminanceImage levels = quantize_map(base);
    const BinaryMask fg = fill_enclosed(threshold_above(levels, otsu_threshold(levels)));
    const ComponentLabels cc = connected_components(fg, Connectivity::Eight);

    ProbabilityMap out(base.width(), base.height(), 0.0);
    const Component* kept = nullptr;
    double kept_score = -1.0;
    for (const auto& comp : cc.components) {
        const double score = static_cast<double>(comp.area) * color_richness(img, comp.pixels, p);
        // Components arrive in increasing id order, so ties keep the smaller id.
        if (score > kept_score || (score == kept_score && comp.area > kept->area)) {
            kept = &comp;
            kept_score = score;
        }
    }
    if (kept == nullptr) return out;
    double mean = 0.0;
    for (auto idx : kept->pixels) mean += base[idx];
    mean /= static_cast<double>(kept->area);
    for (auto idx : kept->pixels) out[idx] = mean;
    return out;
}

} // namespace saliex
