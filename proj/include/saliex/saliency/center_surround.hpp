#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"
#include "saliex/parallel.hpp"

namespace saliex {

struct CenterSurroundParams {
    std::vector<double> rect_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> aspect_ratios{0.5, 0.75, 1.0, 1.5, 2.0};
    int downsample = 2;
    int bins_per_channel = 4;
};

inline void validate(const CenterSurroundParams& p) {
    if (p.rect_fractions.empty() || p.aspect_ratios.empty())
        fail(ErrorCode::InvalidValue, "center-surround needs at least one rectangle size and aspect ratio");
    for (double f : p.rect_fractions)
        if (!(f > 0.0 && f < 1.0)) fail(ErrorCode::InvalidValue, "rect fractions must lie in (0,1)");
    for (double a : p.aspect_ratios)
        if (!(a > 0.0)) fail(ErrorCode::InvalidValue, "aspect ratios must be positive");
    if (p.downsample < 1) fail(ErrorCode::InvalidValue, "downsample must be >= 1");
    if (p.bins_per_channel < 1 || p.bins_per_channel > 16)
        fail(ErrorCode::InvalidValue, "bins_per_channel must be in [1,16]");
}

inline constexpr int kCenterSurroundMinSide = 8;

/// Distances within this relative margin count as tied; the earlier shape
/// (fraction-major, then aspect) wins, so bin order cannot flip the choice.
inline constexpr double kChiSquaredTieMargin = 1e-12;

/// Uniform per-channel color quantization into bins_per_channel^3 bins.
inline Image<std::uint16_t, 1> quantize_colors(const RasterImage& img, int bins_per_channel) {
    Image<std::uint16_t, 1> out(img.width(), img.height());
    const int b = bins_per_channel;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const int r = img[3 * i] * b / 256;
        const int g = img[3 * i + 1] * b / 256;
        const int bl = img[3 * i + 2] * b / 256;
        out[i] = static_cast<std::uint16_t>((r * b + g) * b + bl);
    }
    return out;
}

/// Center rectangle of the given size centered on (x, y), clipped.
inline BoundingBox centered_rect(int x, int y, int rect_w, int rect_h, int width, int height) {
    const int x0 = x - rect_w / 2;
    const int y0 = y - rect_h / 2;
    return {std::max(0, x0), std::max(0, y0), std::min(width - 1, x0 + rect_w - 1),
            std::min(height - 1, y0 + rect_h - 1)};
}

/// Concentric rectangle of twice the linear size around the unclipped center
/// rectangle, clipped.
inline BoundingBox surround_rect(int x, int y, int rect_w, int rect_h, int width, int height) {
    const int x0 = x - rect_w / 2 - rect_w / 2;
    const int y0 = y - rect_h / 2 - rect_h / 2;
    return {std::max(0, x0), std::max(0, y0), std::min(width - 1, x0 + 2 * rect_w - 1),
            std::min(height - 1, y0 + 2 * rect_h - 1)};
}

struct RectShape {
    int w;
    int h;
};

inline std::vector<RectShape> rect_shapes(int width, int height, const CenterSurroundParams& p) {
    std::vector<RectShape> shapes;
    const double base = std::min(width, height);
    for (double f : p.rect_fractions) {
        for (double a : p.aspect_ratios) {
            const double side = f * base;
            const int rw = std::clamp(static_cast<int>(std::lround(side * std::sqrt(a))), 1, width);
            const int rh = std::clamp(static_cast<int>(std::lround(side / std::sqrt(a))), 1, height);
            shapes.push_back({rw, rh});
        }
    }
    return shapes;
}

/// Chi-squared distance 1/2 sum (a-b)^2/(a+b) between two count vectors after
/// each is normalized to frequencies. Bins empty in both contribute 0.
inline double chi_squared(std::span<const IntegralHistogram::Count> a, std::span<const IntegralHistogram::Count> b) {
    double na = 0.0;
    double nb = 0.0;
    for (auto v : a) na += v;
    for (auto v : b) nb += v;
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double fa = a[k] / na;
        const double fb = b[k] / nb;
        const double s = fa + fb;
        if (s > 0.0) sum += (fa - fb) * (fa - fb) / s;
    }
    return 0.5 * sum;
}

struct CenterSurroundBest {
    std::vector<double> distance;     // d*(x)
    std::vector<BoundingBox> rect;    // R*(x), clipped center rectangle
};

/// Per-pixel maximum chi-squared distance over all rectangle shapes.
inline CenterSurroundBest center_surround_search(const RasterImage& work, const CenterSurroundParams& p) {
    const int w = work.width();
    const int h = work.height();
    const int bins = p.bins_per_channel * p.bins_per_channel * p.bins_per_channel;
    const IntegralHistogram ih(quantize_colors(work, p.bins_per_channel), bins);
    const auto shapes = rect_shapes(w, h, p);

    CenterSurroundBest best{std::vector<double>(work.pixel_count(), 0.0),
                            std::vector<BoundingBox>(work.pixel_count())};
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        std::vector<IntegralHistogram::Count> center(static_cast<std::size_t>(bins));
        std::vector<IntegralHistogram::Count> ring(static_cast<std::size_t>(bins));
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            double top = -1.0;
            BoundingBox top_rect{};
            for (const auto& s : shapes) {
                const BoundingBox inner = centered_rect(x, y, s.w, s.h, w, h);
                const BoundingBox outer = surround_rect(x, y, s.w, s.h, w, h);
                ih.query(inner, center);
                ih.query(outer, ring);
                for (std::size_t k = 0; k < ring.size(); ++k) ring[k] -= center[k];
                const double d = chi_squared(center, ring);
                if (d > top + kChiSquaredTieMargin * std::max(top, 0.0)) {
                    top = d;
                    top_rect = inner;
                }
            }
            best.distance[idx] = top;
            best.rect[idx] = top_rect;
        }
    });
    return best;
}

/// Gathers, for every pixel x, the Gaussian-weighted distances d*(x') of all
/// pixels x' whose best rectangle contains x.
inline RealMap center_surround_gather(int width, int height, const CenterSurroundBest& best) {
    int reach_x = 0;
    int reach_y = 0;
    for (std::size_t i = 0; i < best.rect.size(); ++i) {
        const int x = static_cast<int>(i % static_cast<std::size_t>(width));
        const int y = static_cast<int>(i / static_cast<std::size_t>(width));
        const auto& r = best.rect[i];
        reach_x = std::max({reach_x, x - r.x_min, r.x_max - x});
        reach_y = std::max({reach_y, y - r.y_min, r.y_max - y});
    }
    std::vector<double> inv_two_sigma_sq(best.rect.size());
    for (std::size_t i = 0; i < best.rect.size(); ++i) {
        const double sigma = static_cast<double>(std::min(best.rect[i].width(), best.rect[i].height())) / 3.0;
        inv_two_sigma_sq[i] = 1.0 / (2.0 * sigma * sigma);
    }

    RealMap out(width, height, 0.0);
    parallel_for(static_cast<std::size_t>(height), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < width; ++x) {
            double sum = 0.0;
            for (int sy = std::max(0, y - reach_y); sy <= std::min(height - 1, y + reach_y); ++sy) {
                for (int sx = std::max(0, x - reach_x); sx <= std::min(width - 1, x + reach_x); ++sx) {
                    const std::size_t j = static_cast<std::size_t>(sy) * width + sx;
                    if (best.distance[j] <= 0.0 || !best.rect[j].contains(x, y)) continue;
                    const double dx = x - sx;
                    const double dy = y - sy;
                    sum += std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq[j]) * best.distance[j];
                }
            }
            out.at(x, y) = sum;
        }
    });
    return out;
}

/// Downsample factor actually applied: never shrinks the short side below
/// kCenterSurroundMinSide.
inline int effective_downsample(int width, int height, int requested) {
    const int limit = std::max(1, std::min(width, height) / kCenterSurroundMinSide);
    return std::clamp(requested, 1, limit);
}

inline ProbabilityMap center_surround_map(const RasterImage& img, const CenterSurroundParams& p = {}) {
    validate(p);
    if (img.width() < kCenterSurroundMinSide || img.height() < kCenterSurroundMinSide)
        fail(ErrorCode::ImageTooSmall, "center-surround needs at least 8x8");
    const int ds = effective_downsample(img.width(), img.height(), p.downsample);
    const RasterImage work = ds > 1 ? resize_bilinear(img, img.width() / ds, img.height() / ds) : img;
    const CenterSurroundBest best = center_surround_search(work, p);
    const ProbabilityMap small = normalize_unit(center_surround_gather(work.width(), work.height(), best));
    return resize_bilinear(small, img.width(), img.height());
}

} // namespace saliex
