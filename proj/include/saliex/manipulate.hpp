#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/gif.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"
#include "saliex/saliency/edge_refine.hpp"

namespace saliex {

/// Keeps foreground color and turns the background into its luminance gray.
/// With feather > 0 the mask is box-blurred into a soft blend weight.
inline RasterImage desaturate_background(const RasterImage& img, const BinaryMask& mask, int feather = 0) {
    require_same_dims(img, mask, "desaturate_background");
    if (feather < 0) fail(ErrorCode::InvalidValue, "feather radius must be >= 0");
    RasterImage out = img;
    if (feather == 0) {
        for (std::size_t i = 0; i < img.pixel_count(); ++i) {
            if (mask[i]) continue;
            const std::uint8_t l = luma(img[3 * i], img[3 * i + 1], img[3 * i + 2]);
            out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = l;
        }
        return out;
    }
    RealMap soft(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) soft[i] = mask[i] ? 1.0 : 0.0;
    const RealMap weight = box_mean(soft, feather);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double l = luma(img[3 * i], img[3 * i + 1], img[3 * i + 2]);
        for (std::size_t c = 0; c < 3; ++c)
            out[3 * i + c] = static_cast<std::uint8_t>(std::lround(weight[i] * img[3 * i + c] + (1.0 - weight[i]) * l));
    }
    return out;
}

struct WiggleParams {
    int frames = 2;
    int shift = 4;
    int delay_cs = 10;
};

/// Horizontal foreground offset of frame f: round(shift cos(2 pi f / frames)).
inline int wiggle_offset(const WiggleParams& p, int frame) {
    return static_cast<int>(std::lround(p.shift * std::cos(2.0 * std::numbers::pi * frame / p.frames)));
}

/// Background layer with every foreground pixel replaced by the nearest
/// background pixel of the same row (left wins ties; all-foreground rows are
/// mid-gray).
inline RasterImage background_layer(const RasterImage& img, const BinaryMask& mask) {
    RasterImage out = img;
    const int w = img.width();
    std::vector<int> left(static_cast<std::size_t>(w));
    std::vector<int> right(static_cast<std::size_t>(w));
    for (int y = 0; y < img.height(); ++y) {
        auto fg = [&](int x) { return mask.at(x, y) != 0; };
        int last = -1;
        for (int x = 0; x < w; ++x) {
            if (!fg(x)) last = x;
            left[static_cast<std::size_t>(x)] = last;
        }
        last = -1;
        for (int x = w - 1; x >= 0; --x) {
            if (!fg(x)) last = x;
            right[static_cast<std::size_t>(x)] = last;
        }
        for (int x = 0; x < w; ++x) {
            if (!fg(x)) continue;
            const int l = left[static_cast<std::size_t>(x)];
            const int r = right[static_cast<std::size_t>(x)];
            int src = -1;
            if (l >= 0 && r >= 0) src = (x - l <= r - x) ? l : r;
            else src = l >= 0 ? l : r;
            set_pixel(out, x, y, src >= 0 ? pixel(img, src, y) : Rgb{128, 128, 128});
        }
    }
    return out;
}

inline std::vector<RasterImage> wiggle_frames(const RasterImage& img, const BinaryMask& mask, const WiggleParams& p) {
    require_same_dims(img, mask, "wiggle_gif");
    if (p.frames < 2) fail(ErrorCode::InvalidValue, "wiggle needs at least 2 frames");
    if (p.shift < 0 || p.shift >= img.width())
        fail(ErrorCode::InvalidShift, "shift must be in [0, width), got " + std::to_string(p.shift));
    if (p.delay_cs < 0 || p.delay_cs > 65535) fail(ErrorCode::InvalidValue, "delay must fit in 16 bits");
    const RasterImage background = background_layer(img, mask);
    std::vector<RasterImage> frames;
    frames.reserve(static_cast<std::size_t>(p.frames));
    for (int f = 0; f < p.frames; ++f) {
        RasterImage frame = background;
        const int dx = wiggle_offset(p, f);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (mask.at(x, y) && frame.contains(x + dx, y)) set_pixel(frame, x + dx, y, pixel(img, x, y));
        frames.push_back(std::move(frame));
    }
    return frames;
}

/// Two-layer parallax animation encoded as a looping GIF.
inline std::vector<std::uint8_t> wiggle_gif(const RasterImage& img, const BinaryMask& mask, const WiggleParams& p = {}) {
    return gif::encode_animation(wiggle_frames(img, mask, p), {p.delay_cs, 0});
}

} // namespace saliex
