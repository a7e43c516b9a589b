#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "saliex/error.hpp"

namespace saliex {

using Color3 = std::array<double, 3>;

struct GmmOptions {
    int components = 5;
    std::uint64_t seed = 42;
    int kmeans_iterations = 10;
    int em_iterations = 50;
    double variance_floor = 1e-4;
    double tolerance = 1e-10; // per-sample log-likelihood change that ends EM early
};

/// Diagonal-covariance Gaussian mixture over RGB colors scaled to [0,1].
struct GmmColorModel {
    std::vector<double> weights;
    std::vector<Color3> means;
    std::vector<Color3> variances;
    /// responsibilities[i * components + c] = p(c | sample i)
    std::vector<double> responsibilities;
    int iterations = 0;

    int components() const noexcept { return static_cast<int>(weights.size()); }
    double responsibility(std::size_t sample, int c) const noexcept {
        return responsibilities[sample * weights.size() + static_cast<std::size_t>(c)];
    }
};

namespace detail {

inline double sq_dist(const Color3& a, const Color3& b) noexcept {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

// Seeds: one uniformly drawn distinct color, then repeatedly the distinct color
// farthest from all chosen seeds (lowest index on ties).
inline std::vector<Color3> farthest_point_seeds(std::vector<Color3> distinct, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Color3> seeds;
    seeds.push_back(distinct[static_cast<std::size_t>(rng() % distinct.size())]);
    std::vector<double> nearest(distinct.size(), std::numeric_limits<double>::infinity());
    while (static_cast<int>(seeds.size()) < count) {
        std::size_t pick = 0;
        double far = -1.0;
        for (std::size_t i = 0; i < distinct.size(); ++i) {
            nearest[i] = std::min(nearest[i], sq_dist(distinct[i], seeds.back()));
            if (nearest[i] > far) {
                far = nearest[i];
                pick = i;
            }
        }
        seeds.push_back(distinct[pick]);
    }
    return seeds;
}

inline double log_gaussian(const Color3& x, const Color3& mean, const Color3& var) noexcept {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = x[k] - mean[k];
        s += std::log(2.0 * std::numbers::pi * var[k]) + d * d / var[k];
    }
    return -0.5 * s;
}

} // namespace detail

inline std::vector<Color3> distinct_colors(const std::vector<Color3>& samples) {
    std::vector<Color3> distinct = samples;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    return distinct;
}

/// Fits the mixture with k-means initialization then EM. The component count
/// is reduced to the number of distinct colors when that is smaller.
inline GmmColorModel fit_gmm(const std::vector<Color3>& samples, const GmmOptions& opt) {
    if (samples.empty()) fail(ErrorCode::InvalidValue, "cannot fit a mixture to zero samples");
    if (opt.components < 1) fail(ErrorCode::InvalidValue, "mixture needs at least one component");
    const std::vector<Color3> distinct = distinct_colors(samples);
    const int comps = std::min<int>(opt.components, static_cast<int>(distinct.size()));
    const std::size_t n = samples.size();
    const auto cn = static_cast<std::size_t>(comps);

    // k-means on the seeds
    std::vector<Color3> centers = detail::farthest_point_seeds(distinct, comps, opt.seed);
    std::vector<int> assign(n, 0);
    for (int it = 0; it <= opt.kmeans_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < comps; ++c) {
                const double d = detail::sq_dist(samples[i], centers[static_cast<std::size_t>(c)]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        if (it == opt.kmeans_iterations) break;
        std::vector<Color3> sums(cn, Color3{0, 0, 0});
        std::vector<std::size_t> counts(cn, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            for (int k = 0; k < 3; ++k) sums[c][k] += samples[i][k];
            ++counts[c];
        }
        for (std::size_t c = 0; c < cn; ++c)
            if (counts[c] > 0)
                for (int k = 0; k < 3; ++k) centers[c][k] = sums[c][k] / static_cast<double>(counts[c]);
    }

    GmmColorModel model;
    model.weights.assign(cn, 0.0);
    model.means = centers;
    model.variances.assign(cn, Color3{0, 0, 0});
    model.responsibilities.assign(n * cn, 0.0);
    for (std::size_t i = 0; i < n; ++i) model.responsibilities[i * cn + static_cast<std::size_t>(assign[i])] = 1.0;

    auto m_step = [&] {
        for (std::size_t c = 0; c < cn; ++c) {
            double mass = 0.0;
            Color3 mean{0, 0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                const double r = model.responsibilities[i * cn + c];
                mass += r;
                for (int k = 0; k < 3; ++k) mean[k] += r * samples[i][k];
            }
            if (mass <= 0.0) {
                // Starved component: keep its mean, give it the floor variance.
                model.weights[c] = 0.0;
                model.variances[c] = {opt.variance_floor, opt.variance_floor, opt.variance_floor};
                continue;
            }
            for (int k = 0; k < 3; ++k) mean[k] /= mass;
            Color3 var{0, 0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                const double r = model.responsibilities[i * cn + c];
                for (int k = 0; k < 3; ++k) var[k] += r * (samples[i][k] - mean[k]) * (samples[i][k] - mean[k]);
            }
            for (int k = 0; k < 3; ++k) var[k] = std::max(opt.variance_floor, var[k] / mass);
            model.weights[c] = mass / static_cast<double>(n);
            model.means[c] = mean;
            model.variances[c] = var;
        }
        double total = 0.0;
        for (double wgt : model.weights) total += wgt;
        for (double& wgt : model.weights) wgt /= total;
    };

    std::vector<double> logp(cn);
    auto e_step = [&] {
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < cn; ++c) {
                logp[c] = model.weights[c] > 0.0
                              ? std::log(model.weights[c]) +
                                    detail::log_gaussian(samples[i], model.means[c], model.variances[c])
                              : -std::numeric_limits<double>::infinity();
                peak = std::max(peak, logp[c]);
            }
            double z = 0.0;
            for (std::size_t c = 0; c < cn; ++c) z += std::exp(logp[c] - peak);
            for (std::size_t c = 0; c < cn; ++c) model.responsibilities[i * cn + c] = std::exp(logp[c] - peak) / z;
            loglik += peak + std::log(z);
        }
        return loglik / static_cast<double>(n);
    };

    m_step();
    double prev = e_step();
    for (int it = 0; it < opt.em_iterations; ++it) {
        m_step();
        const double cur = e_step();
        model.iterations = it + 1;
        if (std::abs(cur - prev) < opt.tolerance) break;
        prev = cur;
    }
    return model;
}

} // namespace saliex
