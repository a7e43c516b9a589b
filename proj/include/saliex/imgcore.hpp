#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"

namespace saliex {

// ---------------------------------------------------------------------------
// Color conversion

/// Rec.601 luma, rounded half up. Integer arithmetic keeps .5 cases exact.
constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    const int weighted = 299 * r + 587 * g + 114 * b;
    return static_cast<std::uint8_t>(std::min(255, (weighted + 500) / 1000));
}

inline LuminanceImage to_luminance(const RasterImage& img) {
    LuminanceImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        out[i] = luma(img[3 * i], img[3 * i + 1], img[3 * i + 2]);
    return out;
}

inline RealMap to_real(const LuminanceImage& img) {
    RealMap out(img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) out[i] = img[i];
    return out;
}

// ---------------------------------------------------------------------------
// Resampling

namespace detail {

struct BilinearTap {
    int i0;
    int i1;
    double frac;
};

// Pixel-center aligned source coordinate, clamped to the valid range.
inline std::vector<BilinearTap> bilinear_taps(int src_len, int dst_len) {
    std::vector<BilinearTap> taps(static_cast<std::size_t>(dst_len));
    const double scale = static_cast<double>(src_len) / dst_len;
    for (int d = 0; d < dst_len; ++d) {
        double s = (d + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
        const int i0 = static_cast<int>(std::floor(s));
        const int i1 = std::min(i0 + 1, src_len - 1);
        taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
    }
    return taps;
}

template <typename T>
T from_real(double v) {
    if constexpr (std::is_integral_v<T>) {
        const double lo = static_cast<double>(std::numeric_limits<T>::min());
        const double hi = static_cast<double>(std::numeric_limits<T>::max());
        return static_cast<T>(std::clamp(std::round(v), lo, hi));
    } else {
        return static_cast<T>(v);
    }
}

} // namespace detail

/// Bilinear resampling with edge clamping. Same-size requests return a copy.
template <typename T, int C, typename Tag>
Image<T, C, Tag> resize_bilinear(const Image<T, C, Tag>& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1)
        fail(ErrorCode::InvalidDimension, "resize target must be at least 1x1");
    if (new_width == img.width() && new_height == img.height()) return img;

    const auto xs = detail::bilinear_taps(img.width(), new_width);
    const auto ys = detail::bilinear_taps(img.height(), new_height);
    Image<T, C, Tag> out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        const auto& ty = ys[static_cast<std::size_t>(y)];
        for (int x = 0; x < new_width; ++x) {
            const auto& tx = xs[static_cast<std::size_t>(x)];
            // a + f (b - a) is exact when a == b, so flat regions stay flat.
            for (int c = 0; c < C; ++c) {
                const double top = std::lerp(double(img.at(tx.i0, ty.i0, c)), double(img.at(tx.i1, ty.i0, c)), tx.frac);
                const double bottom = std::lerp(double(img.at(tx.i0, ty.i1, c)), double(img.at(tx.i1, ty.i1, c)), tx.frac);
                out.at(x, y, c) = detail::from_real<T>(std::lerp(top, bottom, ty.frac));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Thresholding

using Histogram256 = std::array<std::uint64_t, 256>;

inline std::uint8_t quantize_unit(double p) noexcept {
    return static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0));
}

inline LuminanceImage quantize_map(const ProbabilityMap& map) {
    LuminanceImage out(map.width(), map.height());
    for (std::size_t i = 0; i < map.pixel_count(); ++i) out[i] = quantize_unit(map[i]);
    return out;
}

/// Level maximizing between-class variance, where class 0 holds levels <= t.
/// Ties go to the smallest level; a single-level histogram returns that level.
inline int otsu_threshold(const Histogram256& hist) {
    std::uint64_t total = 0;
    double weighted_total = 0.0;
    int occupied = 0;
    int only_level = 0;
    for (int v = 0; v < 256; ++v) {
        total += hist[static_cast<std::size_t>(v)];
        weighted_total += static_cast<double>(v) * static_cast<double>(hist[static_cast<std::size_t>(v)]);
        if (hist[static_cast<std::size_t>(v)] > 0) {
            ++occupied;
            only_level = v;
        }
    }
    if (occupied <= 1) return only_level;

    double best = -1.0;
    int best_t = 0;
    double count0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        count0 += static_cast<double>(hist[static_cast<std::size_t>(t)]);
        sum0 += static_cast<double>(t) * static_cast<double>(hist[static_cast<std::size_t>(t)]);
        const double count1 = static_cast<double>(total) - count0;
        double between = 0.0;
        if (count0 > 0.0 && count1 > 0.0) {
            const double mean0 = sum0 / count0;
            const double mean1 = (weighted_total - sum0) / count1;
            const double w0 = count0 / static_cast<double>(total);
            const double w1 = count1 / static_cast<double>(total);
            between = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
        }
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

inline Histogram256 histogram(const LuminanceImage& img) {
    Histogram256 hist{};
    for (auto v : img.samples()) ++hist[v];
    return hist;
}

inline int otsu_threshold(const LuminanceImage& img) { return otsu_threshold(histogram(img)); }

inline int otsu_threshold(const ProbabilityMap& map) { return otsu_threshold(quantize_map(map)); }

/// Strict foreground rule: value > t.
inline BinaryMask threshold_above(const LuminanceImage& img, int t) {
    BinaryMask mask(img.width(), img.height());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) mask[i] = img[i] > t ? 1 : 0;
    return mask;
}

// ---------------------------------------------------------------------------
// Connectivity

enum class Connectivity { Four = 4, Eight = 8 };

struct Component {
    int id = 0;
    std::size_t area = 0;
    std::vector<std::size_t> pixels; // linear indices, discovery order
};

struct ComponentLabels {
    Image<int, 1> labels; // 0 = background, otherwise component id
    std::vector<Component> components; // components[i].id == i + 1
};

namespace detail {

inline std::span<const std::array<int, 2>> neighbor_offsets(Connectivity conn) noexcept {
    static constexpr std::array<std::array<int, 2>, 8> kOffsets{{
        {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
    }};
    return std::span<const std::array<int, 2>>(kOffsets.data(), conn == Connectivity::Four ? 4 : 8);
}

} // namespace detail

/// Ids are assigned in raster order of each component's first pixel.
inline ComponentLabels connected_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight) {
    const int w = mask.width();
    const int h = mask.height();
    ComponentLabels result{Image<int, 1>(w, h, 0), {}};
    const auto offsets = detail::neighbor_offsets(conn);
    std::vector<std::size_t> stack;

    for (std::size_t start = 0; start < mask.pixel_count(); ++start) {
        if (!mask[start] || result.labels[start] != 0) continue;
        Component comp;
        comp.id = static_cast<int>(result.components.size()) + 1;
        result.labels[start] = comp.id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            comp.pixels.push_back(idx);
            const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
            const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
            for (const auto& [dx, dy] : offsets) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (!mask.contains(nx, ny)) continue;
                const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                if (mask[n] && result.labels[n] == 0) {
                    result.labels[n] = comp.id;
                    stack.push_back(n);
                }
            }
        }
        comp.area = comp.pixels.size();
        result.components.push_back(std::move(comp));
    }
    return result;
}

/// Background not reachable from the border (4-connected) becomes foreground.
inline BinaryMask fill_enclosed(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> reached(mask.pixel_count(), 0);
    std::vector<std::size_t> stack;
    auto seed = [&](int x, int y) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!mask[i] && !reached[i]) {
            reached[i] = 1;
            stack.push_back(i);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    const auto offsets = detail::neighbor_offsets(Connectivity::Four);
    while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(idx % static_cast<std::size_t>(w));
        const int y = static_cast<int>(idx / static_cast<std::size_t>(w));
        for (const auto& [dx, dy] : offsets) {
            if (mask.contains(x + dx, y + dy)) seed(x + dx, y + dy);
        }
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) out[i] = (mask[i] || !reached[i]) ? 1 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Integral histogram

class IntegralHistogram {
public:
    using Count = std::uint32_t;

    /// `bin_of` holds a bin index in [0, bins) for every pixel.
    IntegralHistogram(const Image<std::uint16_t, 1>& bin_of, int bins)
        : width_(bin_of.width()), height_(bin_of.height()), bins_(bins) {
        if (bins < 1) fail(ErrorCode::InvalidValue, "integral histogram needs at least one bin");
        const std::size_t stride = static_cast<std::size_t>(bins_);
        table_.assign(static_cast<std::size_t>(width_ + 1) * (height_ + 1) * stride, 0);
        std::vector<Count> row(static_cast<std::size_t>(width_ + 1) * stride, 0);
        for (int y = 1; y <= height_; ++y) {
            std::fill(row.begin(), row.end(), 0);
            for (int x = 1; x <= width_; ++x) {
                const int b = bin_of.at(x - 1, y - 1);
                if (b < 0 || b >= bins_) fail(ErrorCode::InvalidValue, "bin index out of range");
                Count* cur = &row[static_cast<std::size_t>(x) * stride];
                const Count* prev = &row[static_cast<std::size_t>(x - 1) * stride];
                std::copy(prev, prev + stride, cur);
                ++cur[b];
                const Count* above = &table_[offset(x, y - 1)];
                Count* dst = &table_[offset(x, y)];
                for (std::size_t k = 0; k < stride; ++k) dst[k] = above[k] + cur[k];
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int bins() const noexcept { return bins_; }

    /// Cumulative count of bin `b` over [0,x) x [0,y).
    Count cumulative(int x, int y, int b) const noexcept { return table_[offset(x, y) + static_cast<std::size_t>(b)]; }

    /// Box query without bounds checks; `out` must hold bins() entries.
    void query(const BoundingBox& box, std::span<Count> out) const noexcept {
        const Count* a = &table_[offset(box.x_max + 1, box.y_max + 1)];
        const Count* b = &table_[offset(box.x_min, box.y_max + 1)];
        const Count* c = &table_[offset(box.x_max + 1, box.y_min)];
        const Count* d = &table_[offset(box.x_min, box.y_min)];
        for (std::size_t k = 0; k < static_cast<std::size_t>(bins_); ++k) out[k] = a[k] - b[k] - c[k] + d[k];
    }

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * (width_ + 1) + x) * static_cast<std::size_t>(bins_);
    }

    int width_;
    int height_;
    int bins_;
    std::vector<Count> table_;
};

inline std::vector<IntegralHistogram::Count> region_histogram(const IntegralHistogram& ih, const BoundingBox& box) {
    if (!box.within(ih.width(), ih.height()))
        fail(ErrorCode::InvalidRegion, "box (" + std::to_string(box.x_min) + "," + std::to_string(box.y_min) + "," +
                                           std::to_string(box.x_max) + "," + std::to_string(box.y_max) +
                                           ") outside image");
    std::vector<IntegralHistogram::Count> out(static_cast<std::size_t>(ih.bins()));
    ih.query(box, out);
    return out;
}

// ---------------------------------------------------------------------------
// Normalization

/// Min-max rescale to [0,1]; a constant map becomes all zeros.
inline ProbabilityMap normalize_unit(const RealMap& map) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : map.samples()) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidValue, "non-finite value in map");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ProbabilityMap out(map.width(), map.height(), 0.0);
    if (!(hi > lo)) return out;
    const double range = hi - lo;
    for (std::size_t i = 0; i < map.pixel_count(); ++i) out[i] = std::clamp((map[i] - lo) / range, 0.0, 1.0);
    return out;
}

} // namespace saliex
