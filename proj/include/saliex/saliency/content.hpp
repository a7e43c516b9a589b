#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"
#include "saliex/parallel.hpp"

namespace saliex {

struct ContentParams {
    int patch_size = 7;
    int k_nearest = 64;
    double position_weight = 3.0;
    int work_size = 64;
};

inline void validate(const ContentParams& p) {
    if (p.patch_size < 3 || p.patch_size % 2 == 0) fail(ErrorCode::InvalidValue, "patch_size must be odd and >= 3");
    if (p.k_nearest < 1) fail(ErrorCode::InvalidValue, "k_nearest must be >= 1");
    if (p.work_size < p.patch_size) fail(ErrorCode::InvalidValue, "work_size must be >= patch_size");
    if (!(p.position_weight >= 0.0)) fail(ErrorCode::InvalidValue, "position_weight must be >= 0");
}

/// Working resolution: the longer side is capped at work_size, the shorter
/// side never drops below the patch size.
inline std::pair<int, int> content_work_size(int width, int height, const ContentParams& p) {
    const int longest = std::max(width, height);
    if (longest <= p.work_size) return {width, height};
    const double scale = static_cast<double>(p.work_size) / longest;
    const int w = std::max(std::min(width, p.patch_size), static_cast<int>(std::lround(width * scale)));
    const int h = std::max(std::min(height, p.patch_size), static_cast<int>(std::lround(height * scale)));
    return {w, h};
}

/// Patch dissimilarity saliency at working resolution (before upsampling and
/// normalization). Each pixel scores 1 - exp(-mean of its k smallest
/// position-discounted patch distances to every other pixel).
inline RealMap content_saliency_work(const RasterImage& work, const ContentParams& p) {
    const int w = work.width();
    const int h = work.height();
    const int radius = p.patch_size / 2;
    const std::size_t n = work.pixel_count();
    const std::size_t patch_len = static_cast<std::size_t>(p.patch_size) * p.patch_size * 3;
    const std::size_t stride = (patch_len + 15) / 16 * 16; // zero padded, same in every patch

    std::vector<std::uint8_t> patches(n * stride, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t* dst = &patches[(static_cast<std::size_t>(y) * w + x) * stride];
            for (int dy = -radius; dy <= radius; ++dy) {
                const int sy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    for (int c = 0; c < 3; ++c) *dst++ = work.at(sx, sy, c);
                }
            }
        }
    }

    const double color_norm = 1.0 / (static_cast<double>(patch_len) * 255.0);
    const double diag = std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(p.k_nearest), n - 1);

    RealMap out(w, h, 0.0);
    if (k == 0) return out;

    parallel_for(n, [&](std::size_t i) {
        thread_local std::vector<double> dist;
        dist.clear();
        dist.reserve(n);
        const std::uint8_t* pi = &patches[i * stride];
        const int xi = static_cast<int>(i % static_cast<std::size_t>(w));
        const int yi = static_cast<int>(i / static_cast<std::size_t>(w));
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const std::uint8_t* pj = &patches[j * stride];
            unsigned sad = 0;
            for (std::size_t q = 0; q < stride; ++q) sad += static_cast<unsigned>(std::abs(int(pi[q]) - int(pj[q])));
            const double dx = xi - static_cast<int>(j % static_cast<std::size_t>(w));
            const double dy = yi - static_cast<int>(j / static_cast<std::size_t>(w));
            const double pos = std::sqrt(dx * dx + dy * dy) / diag;
            dist.push_back(sad * color_norm / (1.0 + p.position_weight * pos));
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
        double sum = 0.0;
        for (std::size_t q = 0; q < k; ++q) sum += dist[q];
        out[i] = 1.0 - std::exp(-sum / static_cast<double>(k));
    });
    return out;
}

inline ProbabilityMap content_saliency(const RasterImage& img, const ContentParams& p = {}) {
    validate(p);
    if (img.width() < p.patch_size || img.height() < p.patch_size)
        fail(ErrorCode::ImageTooSmall, "content saliency needs an image at least patch_size wide and high");
    const auto [ww, wh] = content_work_size(img.width(), img.height(), p);
    const RasterImage work = resize_bilinear(img, ww, wh);
    const RealMap raw = content_saliency_work(work, p);
    return normalize_unit(resize_bilinear(raw, img.width(), img.height()));
}

} // namespace saliex
