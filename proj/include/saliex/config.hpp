#pragma once

// Flat `key = value` run configuration. Lines starting with '#' are comments,
// values may be quoted, lists are comma separated. Unknown keys are errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saliex/error.hpp"
#include "saliex/evaluation.hpp"
#include "saliex/manipulate.hpp"
#include "saliex/segmentation.hpp"

namespace saliex {

struct RunConfig {
    PipelineConfig pipeline;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int feather = 0;
    WiggleParams wiggle;
    unsigned jobs = 1;

    /// Seed is mirrored into every randomized stage.
    void sync() { pipeline.saliency.color_spatial.seed = seed; }
};

namespace detail {

inline std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(ErrorCode::ConfigError, key + ": '" + text + "' is not a valid number");
    return v;
}

inline double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        fail(ErrorCode::ConfigError, key + ": '" + text + "' is not a valid real");
    return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
    }
    return items;
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_real(key, item));
    if (out.empty()) fail(ErrorCode::ConfigError, key + ": list must not be empty");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    fail(ErrorCode::ConfigError, key + ": '" + text + "' is not a boolean");
}

inline std::vector<MapId> parse_map_list(const std::string& key, const std::string& text) {
    std::vector<MapId> ids;
    if (text == "all") return {kAllMaps.begin(), kAllMaps.end()};
    for (const auto& name : split_list(text)) {
        const auto id = parse_map_name(name);
        if (!id) fail(ErrorCode::ConfigError, key + ": unknown map '" + name + "'");
        ids.push_back(*id);
    }
    if (ids.empty()) fail(ErrorCode::ConfigError, key + ": at least one map must be enabled");
    return ids;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> setters = [] {
        std::map<std::string, Setter> s;
        s["maps"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.select(parse_map_list(k, v));
        };
        for (MapId id : kAllMaps) {
            const auto i = static_cast<std::size_t>(id);
            s["weight." + std::string(map_name(id))] = [i](RunConfig& c, const std::string& k, const std::string& v) {
                const double w = parse_real(k, v);
                if (!(w > 0.0)) fail(ErrorCode::ConfigError, k + " must be positive");
                c.pipeline.saliency.weights[i] = w;
            };
        }
        s["parallel"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.parallel = parse_bool(k, v);
        };
        s["contrast.levels"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.contrast.levels = parse_number<int>(k, v);
        };
        s["edges.window"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.edges.window = parse_number<int>(k, v);
        };
        s["edges.offset"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.edges.offset = parse_real(k, v);
        };
        s["content.patch_size"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.content.patch_size = parse_number<int>(k, v);
        };
        s["content.k_nearest"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.content.k_nearest = parse_number<int>(k, v);
        };
        s["content.position_weight"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.content.position_weight = parse_real(k, v);
        };
        s["content.work_size"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.content.work_size = parse_number<int>(k, v);
        };
        s["center_surround.rect_fractions"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.center_surround.rect_fractions = parse_real_list(k, v);
        };
        s["center_surround.aspect_ratios"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.center_surround.aspect_ratios = parse_real_list(k, v);
        };
        s["center_surround.downsample"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.center_surround.downsample = parse_number<int>(k, v);
        };
        s["center_surround.bins_per_channel"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.center_surround.bins_per_channel = parse_number<int>(k, v);
        };
        s["color_spatial.components"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.color_spatial.components = parse_number<int>(k, v);
        };
        s["color_spatial.em_iterations"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.color_spatial.em_iterations = parse_number<int>(k, v);
        };
        s["color_spatial.variance_floor"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.color_spatial.variance_floor = parse_real(k, v);
        };
        s["spatial_refine.max_hull_points"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.spatial_refine.max_hull_points = parse_number<std::size_t>(k, v);
        };
        s["spatial_refine.hull_volume_floor"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.saliency.spatial_refine.hull_volume_floor = parse_real(k, v);
        };
        s["energy.gamma"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.pairwise_strength = parse_real(k, v);
        };
        s["energy.beta"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "auto") c.pipeline.color_decay.reset();
            else c.pipeline.color_decay = parse_real(k, v);
        };
        s["energy.max_passes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.pipeline.max_passes = parse_number<int>(k, v);
        };
        s["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.seed = parse_number<std::uint64_t>(k, v);
        };
        s["out_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; };
        s["feather"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.feather = parse_number<int>(k, v); };
        s["wiggle.frames"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.wiggle.frames = parse_number<int>(k, v);
        };
        s["wiggle.shift"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.wiggle.shift = parse_number<int>(k, v);
        };
        s["wiggle.delay"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.wiggle.delay_cs = parse_number<int>(k, v);
        };
        s["jobs"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.jobs = parse_number<unsigned>(k, v); };
        return s;
    }();
    return setters;
}

} // namespace detail

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : detail::config_setters()) keys.push_back(k);
    return keys;
}

inline void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& setters = detail::config_setters();
    const auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    it->second(cfg, key, value);
    cfg.sync();
    try {
        validate(cfg.pipeline.saliency.content);
        validate(cfg.pipeline.saliency.center_surround);
        validate(energy_model_for(RasterImage(1, 1), cfg.pipeline));
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, key + ": " + e.what());
    }
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = detail::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::ConfigError, source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::strip_quotes(detail::trim(text.substr(eq + 1)));
        try {
            apply_config_value(cfg, key, value);
        } catch (const Error& e) {
            fail(ErrorCode::ConfigError, source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.sync();
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
    return parse_config(in, path.string());
}

/// Every effective setting, for report echoes.
inline nlohmann::json as_json(const RunConfig& c) {
    const auto& s = c.pipeline.saliency;
    nlohmann::json maps = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::object();
    for (MapId id : kAllMaps) {
        if (s.is_enabled(id)) maps.push_back(std::string(map_name(id)));
        weights[std::string(map_name(id))] = s.weight(id);
    }
    return {
        {"maps", maps},
        {"weights", weights},
        {"contrast", {{"levels", s.contrast.levels}}},
        {"edges", {{"window", s.edges.window}, {"offset", s.edges.offset}}},
        {"content",
         {{"patch_size", s.content.patch_size},
          {"k_nearest", s.content.k_nearest},
          {"position_weight", s.content.position_weight},
          {"work_size", s.content.work_size}}},
        {"center_surround",
         {{"rect_fractions", s.center_surround.rect_fractions},
          {"aspect_ratios", s.center_surround.aspect_ratios},
          {"downsample", s.center_surround.downsample},
          {"bins_per_channel", s.center_surround.bins_per_channel}}},
        {"color_spatial",
         {{"components", s.color_spatial.components},
          {"em_iterations", s.color_spatial.em_iterations},
          {"variance_floor", s.color_spatial.variance_floor}}},
        {"spatial_refine",
         {{"max_hull_points", s.spatial_refine.max_hull_points},
          {"hull_volume_floor", s.spatial_refine.hull_volume_floor}}},
        {"energy",
         {{"gamma", c.pipeline.pairwise_strength},
          {"beta", c.pipeline.color_decay ? nlohmann::json(*c.pipeline.color_decay) : nlohmann::json("auto")},
          {"max_passes", c.pipeline.max_passes}}},
        {"seed", c.seed},
        {"feather", c.feather},
        {"wiggle", {{"frames", c.wiggle.frames}, {"shift", c.wiggle.shift}, {"delay", c.wiggle.delay_cs}}},
    };
}

} // namespace saliex
