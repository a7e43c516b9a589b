#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/saliency/stack.hpp"

namespace saliex {

/// Pairwise part of the labeling energy. The per-map weights travel with the
/// saliency stack.
struct EnergyModel {
    double pairwise_strength = 2.0; // gamma
    double color_decay = 1.0;       // beta
};

using Labeling = BinaryMask;

struct IcmReport {
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int passes = 0;
    long long flips = 0;
    std::vector<double> pass_energies; // energy after each pass
};

struct Pixel {
    int x = 0;
    int y = 0;
};

/// Squared RGB distance with channels scaled to [0,1].
inline double color_distance_sq(const RasterImage& img, std::size_t a, std::size_t b) noexcept {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double d = (static_cast<double>(img[3 * a + static_cast<std::size_t>(c)]) -
                          static_cast<double>(img[3 * b + static_cast<std::size_t>(c)])) /
                         255.0;
        s += d * d;
    }
    return s;
}

/// beta = 1 / (2 * mean squared color distance over 4-adjacent pairs); 1 when
/// the image has no color variation.
inline double default_color_decay(const RasterImage& img) {
    const int w = img.width();
    const int h = img.height();
    double sum = 0.0;
    std::size_t pairs = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w) {
                sum += color_distance_sq(img, i, i + 1);
                ++pairs;
            }
            if (y + 1 < h) {
                sum += color_distance_sq(img, i, i + static_cast<std::size_t>(w));
                ++pairs;
            }
        }
    }
    if (pairs == 0 || sum <= 0.0) return 1.0;
    return 1.0 / (2.0 * sum / static_cast<double>(pairs));
}

inline void validate(const EnergyModel& m) {
    if (!(m.pairwise_strength >= 0.0)) fail(ErrorCode::InvalidValue, "pairwise strength must be >= 0");
    if (!(m.color_decay > 0.0)) fail(ErrorCode::InvalidValue, "color decay must be > 0");
}

/// sum_k lambda_k F_k, with F_k = 1 - f_k for label 1 and f_k for label 0.
inline double data_cost(const SaliencyStack& stack, std::size_t pixel, int label) noexcept {
    double cost = 0.0;
    for (const auto& e : stack.maps) {
        const double f = e.map[pixel];
        cost += e.weight * (label ? 1.0 - f : f);
    }
    return cost;
}

inline double data_cost(const SaliencyStack& stack, Pixel p, int label) noexcept {
    return data_cost(stack, static_cast<std::size_t>(p.y) * stack.width + p.x, label);
}

namespace detail {

inline double pairwise_term(const RasterImage& img, std::size_t a, std::size_t b, int la, int lb,
                            const EnergyModel& m) noexcept {
    if (la == lb) return 0.0;
    return m.pairwise_strength * std::exp(-m.color_decay * color_distance_sq(img, a, b));
}

} // namespace detail

/// Potts term with color decay; zero for equal labels.
inline double pairwise_cost(const RasterImage& img, Pixel a, Pixel b, int la, int lb, const EnergyModel& m) {
    if (!img.contains(a.x, a.y) || !img.contains(b.x, b.y)) fail(ErrorCode::InvalidRegion, "pixel outside image");
    if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1) fail(ErrorCode::NotNeighbors, "pixels are not 4-neighbors");
    return detail::pairwise_term(img, static_cast<std::size_t>(a.y) * img.width() + a.x,
                                 static_cast<std::size_t>(b.y) * img.width() + b.x, la, lb, m);
}

/// Data term over all pixels plus the pairwise term over each unordered
/// 4-adjacent pair, counted once.
inline double total_energy(const SaliencyStack& stack, const Labeling& labels, const RasterImage& img,
                           const EnergyModel& m) {
    if (labels.width() != stack.width || labels.height() != stack.height)
        fail(ErrorCode::DimensionMismatch, "labeling is not aligned with the saliency stack");
    require_same_dims(labels, img, "total_energy");
    const int w = img.width();
    const int h = img.height();
    double energy = 0.0;
    for (std::size_t i = 0; i < labels.pixel_count(); ++i) energy += data_cost(stack, i, labels[i]);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w) energy += detail::pairwise_term(img, i, i + 1, labels[i], labels[i + 1], m);
            if (y + 1 < h)
                energy += detail::pairwise_term(img, i, i + static_cast<std::size_t>(w), labels[i],
                                                labels[i + static_cast<std::size_t>(w)], m);
        }
    }
    return energy;
}

/// Per-pixel argmin of the data term: label 1 iff sum lambda f > half the
/// total weight. Ties go to background.
inline Labeling first_order_labeling(const SaliencyStack& stack) {
    if (stack.maps.empty()) fail(ErrorCode::InvalidValue, "first-order labeling needs at least one map");
    Labeling labels(stack.width, stack.height, 0);
    const double half = 0.5 * stack.total_weight();
    for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
        double s = 0.0;
        for (const auto& e : stack.maps) s += e.weight * e.map[i];
        labels[i] = s > half ? 1 : 0;
    }
    return labels;
}

/// Energy change from flipping one pixel: data delta plus the deltas of its
/// incident pairwise terms.
inline double flip_delta(const SaliencyStack& stack, const Labeling& labels, const RasterImage& img,
                         const EnergyModel& m, std::size_t i) noexcept {
    const int w = img.width();
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    const int cur = labels[i];
    const int alt = 1 - cur;
    double delta = data_cost(stack, i, alt) - data_cost(stack, i, cur);
    auto neighbor = [&](std::size_t j) {
        delta += detail::pairwise_term(img, i, j, alt, labels[j], m) - detail::pairwise_term(img, i, j, cur, labels[j], m);
    };
    if (x > 0) neighbor(i - 1);
    if (x + 1 < w) neighbor(i + 1);
    if (y > 0) neighbor(i - static_cast<std::size_t>(w));
    if (y + 1 < img.height()) neighbor(i + static_cast<std::size_t>(w));
    return delta;
}

struct FlipEvent {
    std::size_t pixel;
    double delta;           // incremental energy change
    double energy_after;    // running energy after the flip
    const Labeling& labels; // state after the flip
};

struct IcmOptions {
    int max_passes = 100;
    /// A flip is accepted only if it lowers the energy by more than this.
    double min_improvement = 1e-12;
    std::function<void(const FlipEvent&)> on_flip;
};

/// Raster-order single-pixel flips, accepted only on strict energy decrease,
/// until a pass flips nothing or the pass budget runs out.
inline std::pair<Labeling, IcmReport> icm_refine(const SaliencyStack& stack, Labeling labels, const RasterImage& img,
                                                 const EnergyModel& m, const IcmOptions& opt = {}) {
    validate(m);
    IcmReport report;
    double energy = total_energy(stack, labels, img, m);
    report.initial_energy = energy;
    for (int pass = 0; pass < opt.max_passes; ++pass) {
        long long flips = 0;
        for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
            const double delta = flip_delta(stack, labels, img, m, i);
            if (delta < -opt.min_improvement) {
                labels[i] = static_cast<std::uint8_t>(1 - labels[i]);
                energy += delta;
                ++flips;
                if (opt.on_flip) opt.on_flip(FlipEvent{i, delta, energy, labels});
            }
        }
        ++report.passes;
        report.flips += flips;
        report.pass_energies.push_back(energy);
        if (flips == 0) break;
    }
    report.final_energy = energy;
    return {std::move(labels), report};
}

inline std::pair<Labeling, IcmReport> icm_refine(const SaliencyStack& stack, Labeling labels, const RasterImage& img,
                                                 const EnergyModel& m, int max_passes) {
    IcmOptions opt;
    opt.max_passes = max_passes;
    return icm_refine(stack, std::move(labels), img, m, opt);
}

// ---------------------------------------------------------------------------

struct PipelineConfig {
    SaliencyConfig saliency;
    double pairwise_strength = 2.0;
    std::optional<double> color_decay; // per-image default when unset
    int max_passes = 100;
};

inline EnergyModel energy_model_for(const RasterImage& img, const PipelineConfig& cfg) {
    return EnergyModel{cfg.pairwise_strength, cfg.color_decay ? *cfg.color_decay : default_color_decay(img)};
}

struct SegmentResult {
    SaliencyStack stack;
    Labeling first_order;
    BinaryMask mask;
    EnergyModel model;
    IcmReport report;
};

inline SegmentResult segment_image(const RasterImage& img, const PipelineConfig& cfg = {}) {
    SegmentResult r;
    r.stack = build_stack(img, cfg.saliency);
    r.model = energy_model_for(img, cfg);
    r.first_order = first_order_labeling(r.stack);
    auto [labels, report] = icm_refine(r.stack, r.first_order, img, r.model, cfg.max_passes);
    r.mask = std::move(labels);
    r.report = std::move(report);
    return r;
}

inline BinaryMask segment_pipeline(const RasterImage& img, const PipelineConfig& cfg = {}) {
    return segment_image(img, cfg).mask;
}

} // namespace saliex
