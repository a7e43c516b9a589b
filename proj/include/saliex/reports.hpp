#pragma once

// JSON renderings of stacks, ICM runs and evaluation reports.

#include <string>
#include <vector>

#include <json.hpp>

#include "saliex/evaluation.hpp"
#include "saliex/saliency/stack.hpp"
#include "saliex/segmentation.hpp"

namespace saliex {

inline nlohmann::json as_json(const BoundingBox& b) { return nlohmann::json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

inline nlohmann::json as_json(const IcmReport& r) {
    return {{"initial_energy", r.initial_energy},
            {"final_energy", r.final_energy},
            {"passes", r.passes},
            {"flips", r.flips},
            {"pass_energies", r.pass_energies}};
}

/// `files[i]` is the exported path of stack.maps[i] (may be empty).
inline nlohmann::json stack_manifest(const SaliencyStack& stack, const std::vector<std::string>& files,
                                     const nlohmann::json& parameters) {
    nlohmann::json maps = nlohmann::json::array();
    for (std::size_t i = 0; i < stack.maps.size(); ++i) {
        const auto& e = stack.maps[i];
        maps.push_back({{"name", e.name}, {"weight", e.weight}, {"file", i < files.size() ? files[i] : std::string()}});
    }
    return {{"width", stack.width}, {"height", stack.height}, {"K", stack.size()}, {"maps", maps},
            {"parameters", parameters}};
}

inline nlohmann::json as_json(const EvalReport& report, const nlohmann::json& config) {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& s : report.scores)
        images.push_back({{"path", s.image_path.generic_string()},
                          {"jaccard", s.jaccard},
                          {"ground_truth", as_json(s.ground_truth)},
                          {"predicted", s.predicted ? as_json(*s.predicted) : nlohmann::json(nullptr)}});
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures) failures.push_back({{"path", f.image_path.generic_string()}, {"error", f.error}});
    nlohmann::json edges = nlohmann::json::array();
    for (int b = 0; b <= kHistogramBins; ++b) edges.push_back(b / static_cast<double>(kHistogramBins));
    return {{"images", images},
            {"scored", report.scores.size()},
            {"mean_jaccard", report.mean_jaccard},
            {"histogram", {{"edges", edges}, {"counts", report.histogram}}},
            {"failures", failures},
            {"config", config}};
}

} // namespace saliex
