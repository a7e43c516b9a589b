#pragma once

#include <array>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/saliency/center_surround.hpp"
#include "saliex/saliency/color_spatial.hpp"
#include "saliex/saliency/content.hpp"
#include "saliex/saliency/contrast.hpp"
#include "saliex/saliency/edge_refine.hpp"

namespace saliex {

enum class MapId {
    Contrast,
    ContrastRefined,
    Content,
    ContentRefined,
    CenterSurround,
    ColorSpatial,
    ColorSpatialRefined,
};

inline constexpr int kMapCount = 7;

inline constexpr std::array<MapId, kMapCount> kAllMaps{
    MapId::Contrast,       MapId::ContrastRefined, MapId::Content,
    MapId::ContentRefined, MapId::CenterSurround,  MapId::ColorSpatial,
    MapId::ColorSpatialRefined,
};

constexpr std::string_view map_name(MapId id) noexcept {
    switch (id) {
    case MapId::Contrast: return "contrast";
    case MapId::ContrastRefined: return "contrast_refined";
    case MapId::Content: return "content";
    case MapId::ContentRefined: return "content_refined";
    case MapId::CenterSurround: return "center_surround";
    case MapId::ColorSpatial: return "color_spatial";
    case MapId::ColorSpatialRefined: return "color_spatial_refined";
    }
    return "";
}

inline std::optional<MapId> parse_map_name(std::string_view name) noexcept {
    for (MapId id : kAllMaps)
        if (map_name(id) == name) return id;
    return std::nullopt;
}

struct SaliencyConfig {
    std::array<bool, kMapCount> enabled{true, true, true, true, true, true, true};
    std::array<double, kMapCount> weights{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    ContrastParams contrast;
    EdgeRefineParams edges;
    ContentParams content;
    CenterSurroundParams center_surround;
    ColorSpatialParams color_spatial;
    SpatialRefineParams spatial_refine;
    bool parallel = true;

    bool is_enabled(MapId id) const noexcept { return enabled[static_cast<std::size_t>(id)]; }
    double weight(MapId id) const noexcept { return weights[static_cast<std::size_t>(id)]; }

    /// Enables exactly the listed maps.
    void select(const std::vector<MapId>& ids) {
        enabled.fill(false);
        for (MapId id : ids) enabled[static_cast<std::size_t>(id)] = true;
    }
};

struct StackEntry {
    MapId id;
    std::string name;
    ProbabilityMap map;
    double weight;
};

/// Ordered, dimension-aligned saliency maps with their fusion weights.
struct SaliencyStack {
    int width = 0;
    int height = 0;
    std::vector<StackEntry> maps;

    int size() const noexcept { return static_cast<int>(maps.size()); }
    double total_weight() const noexcept {
        double s = 0.0;
        for (const auto& e : maps) s += e.weight;
        return s;
    }
    const StackEntry* find(MapId id) const noexcept {
        for (const auto& e : maps)
            if (e.id == id) return &e;
        return nullptr;
    }
};

/// Validates alignment and weights, then returns the stack.
inline SaliencyStack make_stack(int width, int height, std::vector<StackEntry> maps) {
    if (maps.empty()) fail(ErrorCode::InvalidValue, "a saliency stack needs at least one map");
    for (const auto& e : maps) {
        if (e.map.width() != width || e.map.height() != height)
            fail(ErrorCode::DimensionMismatch, "map '" + e.name + "' is not aligned with the image");
        if (!(e.weight > 0.0)) fail(ErrorCode::InvalidValue, "map '" + e.name + "' needs a positive weight");
    }
    return SaliencyStack{width, height, std::move(maps)};
}

namespace detail {

template <typename Fn>
auto named_stage(MapId id, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(map_name(id)) + ": " + e.what());
    }
}

template <typename Fn>
std::future<ProbabilityMap> launch(bool parallel, Fn fn) {
    return std::async(parallel ? std::launch::async : std::launch::deferred, std::move(fn));
}

} // namespace detail

/// Computes every enabled map in the fixed order. Refined maps compute their
/// base map even when the base itself is disabled.
inline SaliencyStack build_stack(const RasterImage& img, const SaliencyConfig& cfg = {}) {
    for (double w : cfg.weights)
        if (!(w > 0.0)) fail(ErrorCode::InvalidValue, "map weights must be positive");
    auto wants = [&](MapId a, MapId b) { return cfg.is_enabled(a) || cfg.is_enabled(b); };

    std::optional<std::future<ProbabilityMap>> contrast;
    std::optional<std::future<ProbabilityMap>> content;
    std::optional<std::future<ProbabilityMap>> center;
    std::optional<std::future<ProbabilityMap>> spatial;
    if (wants(MapId::Contrast, MapId::ContrastRefined))
        contrast = detail::launch(cfg.parallel, [&] {
            return detail::named_stage(MapId::Contrast, [&] { return multiscale_contrast(img, cfg.contrast); });
        });
    if (wants(MapId::Content, MapId::ContentRefined))
        content = detail::launch(cfg.parallel, [&] {
            return detail::named_stage(MapId::Content, [&] { return content_saliency(img, cfg.content); });
        });
    if (cfg.is_enabled(MapId::CenterSurround))
        center = detail::launch(cfg.parallel, [&] {
            return detail::named_stage(MapId::CenterSurround, [&] { return center_surround_map(img, cfg.center_surround); });
        });
    if (wants(MapId::ColorSpatial, MapId::ColorSpatialRefined))
        spatial = detail::launch(cfg.parallel, [&] {
            return detail::named_stage(MapId::ColorSpatial,
                                       [&] { return color_spatial_distribution(img, cfg.color_spatial); });
        });

    std::vector<StackEntry> entries;
    auto push = [&](MapId id, ProbabilityMap map) {
        entries.push_back({id, std::string(map_name(id)), std::move(map), cfg.weight(id)});
    };
    // Collect every future before rethrowing so no task outlives `img`.
    std::optional<ProbabilityMap> contrast_map, content_map, center_map, spatial_map;
    std::exception_ptr error;
    auto collect = [&](std::optional<std::future<ProbabilityMap>>& fut, std::optional<ProbabilityMap>& dst) {
        if (!fut) return;
        try {
            dst = fut->get();
        } catch (...) {
            if (!error) error = std::current_exception();
        }
    };
    collect(contrast, contrast_map);
    collect(content, content_map);
    collect(center, center_map);
    collect(spatial, spatial_map);
    if (error) std::rethrow_exception(error);

    if (contrast_map) {
        if (cfg.is_enabled(MapId::Contrast)) push(MapId::Contrast, *contrast_map);
        if (cfg.is_enabled(MapId::ContrastRefined))
            push(MapId::ContrastRefined, detail::named_stage(MapId::ContrastRefined, [&] {
                     return refine_by_edges(*contrast_map, img, cfg.edges);
                 }));
    }
    if (content_map) {
        if (cfg.is_enabled(MapId::Content)) push(MapId::Content, *content_map);
        if (cfg.is_enabled(MapId::ContentRefined))
            push(MapId::ContentRefined, detail::named_stage(MapId::ContentRefined, [&] {
                     return refine_by_edges(*content_map, img, cfg.edges);
                 }));
    }
    if (center_map) push(MapId::CenterSurround, std::move(*center_map));
    if (spatial_map) {
        if (cfg.is_enabled(MapId::ColorSpatial)) push(MapId::ColorSpatial, *spatial_map);
        if (cfg.is_enabled(MapId::ColorSpatialRefined))
            push(MapId::ColorSpatialRefined, detail::named_stage(MapId::ColorSpatialRefined, [&] {
                     return refine_spatial_distribution(*spatial_map, img, cfg.spatial_refine);
                 }));
    }
    return make_stack(img.width(), img.height(), std::move(entries));
}

} // namespace saliex
