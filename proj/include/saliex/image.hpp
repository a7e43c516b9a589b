#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "saliex/error.hpp"

namespace saliex {

inline constexpr int kMaxSide = 32767;

/// Row-major interleaved pixel buffer. `Tag` only distinguishes types that
/// share a sample layout (a binary mask is not a luminance image).
template <typename T, int Channels, typename Tag = void>
class Image {
    static_assert(Channels >= 1);

public:
    using value_type = T;
    static constexpr int channels = Channels;

    Image() = default;

    Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
    }

    Image(int width, int height, std::vector<T> samples)
        : width_(width), height_(height), data_(std::move(samples)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * height * Channels)
            fail(ErrorCode::InvalidDimension, "sample count does not match " + std::to_string(width) +
                                                  "x" + std::to_string(height));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    T& at(int x, int y, int c = 0) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
    }
    const T& at(int x, int y, int c = 0) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
    }

    // Linear pixel index access, single-channel convenience.
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> samples() & noexcept { return data_; }
    std::span<const T> samples() const& noexcept { return data_; }
    std::vector<T>& raw() & noexcept { return data_; }
    const std::vector<T>& raw() const& noexcept { return data_; }
    // Temporaries hand over their storage rather than a dangling view.
    std::vector<T> raw() && noexcept { return std::move(data_); }
    std::span<const T> samples() && = delete;

    template <typename U, typename UTag>
    bool same_size(const Image<U, Channels, UTag>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }
    template <typename U, int C, typename UTag>
    bool same_dims(const Image<U, C, UTag>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide)
            fail(ErrorCode::InvalidDimension,
                 "image dimensions must be in [1, 32767], got " + std::to_string(width) + "x" +
                     std::to_string(height));
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct MaskTag {};

using RasterImage = Image<std::uint8_t, 3>;
using LuminanceImage = Image<std::uint8_t, 1>;
using ProbabilityMap = Image<double, 1>;
using RealMap = Image<double, 1>;
/// Foreground = 1, background = 0.
using BinaryMask = Image<std::uint8_t, 1, MaskTag>;

using Rgb = std::array<std::uint8_t, 3>;

inline Rgb pixel(const RasterImage& img, int x, int y) noexcept {
    return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
}

inline void set_pixel(RasterImage& img, int x, int y, Rgb rgb) noexcept {
    img.at(x, y, 0) = rgb[0];
    img.at(x, y, 1) = rgb[1];
    img.at(x, y, 2) = rgb[2];
}

template <typename A, typename B>
void require_same_dims(const A& a, const B& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height())
        fail(ErrorCode::DimensionMismatch,
             std::string(what) + ": " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                 " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

/// Inclusive axis-aligned pixel rectangle.
struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }
    long long width() const noexcept { return static_cast<long long>(x_max) - x_min + 1; }
    long long height() const noexcept { return static_cast<long long>(y_max) - y_min + 1; }
    long long area() const noexcept { return valid() ? width() * height() : 0; }
    bool contains(int x, int y) const noexcept {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
    bool within(int image_width, int image_height) const noexcept {
        return valid() && x_min >= 0 && y_min >= 0 && x_max < image_width && y_max < image_height;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

} // namespace saliex
