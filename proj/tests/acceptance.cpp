// Acceptance suite: one PASS/FAIL line per criterion, tolerances and time
// budgets pinned below. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "test_util.hpp"

using namespace saliex;
using saliex::test::Rng;

namespace {

constexpr double kJaccardTol = 1e-12;
constexpr double kEnergyTol = 1e-9;

struct Outcome {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

BoundingBox random_box(Rng& rng, int size) {
    const int x0 = rng.uniform_int(0, size - 1), x1 = rng.uniform_int(0, size - 1);
    const int y0 = rng.uniform_int(0, size - 1), y1 = rng.uniform_int(0, size - 1);
    return {std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
}

SaliencyStack random_stack(Rng& rng, int w, int h) {
    const int k = rng.uniform_int(1, kMapCount);
    std::vector<StackEntry> entries;
    for (int i = 0; i < k; ++i) {
        const MapId id = kAllMaps[static_cast<std::size_t>(i)];
        entries.push_back({id, std::string(map_name(id)), test::random_map(rng, w, h), 0.25 + 2 * rng.uniform()});
    }
    return make_stack(w, h, std::move(entries));
}

EnergyModel random_model(Rng& rng) { return {0.25 + 3 * rng.uniform(), 0.25 + 4 * rng.uniform()}; }

// Energy from the definition: ordered neighbor pairs, halved.
double energy_oracle(const SaliencyStack& s, const Labeling& l, const RasterImage& img, const EnergyModel& m) {
    const int w = img.width(), h = img.height();
    double e = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y * w + x);
            for (const auto& entry : s.maps) e += entry.weight * (l[i] ? 1 - entry.map[i] : entry.map[i]);
            const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& d : nb) {
                const int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const auto j = static_cast<std::size_t>(ny * w + nx);
                if (l[i] == l[j]) continue;
                double dist = 0;
                for (int c = 0; c < 3; ++c) dist += std::pow((img.at(x, y, c) - img.at(nx, ny, c)) / 255.0, 2);
                e += 0.5 * m.pairwise_strength * std::exp(-m.color_decay * dist);
            }
        }
    return e;
}

Outcome jaccard_oracle() {
    Outcome out;
    Rng rng(2002);
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_box(rng, 100), b = random_box(rng, 100);
        long long inter = 0, uni = 0;
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x) {
                const bool ia = a.contains(x, y), ib = b.contains(x, y);
                inter += ia && ib;
                uni += ia || ib;
            }
        worst = std::max(worst, std::abs(jaccard_index(a, b) - static_cast<double>(inter) / static_cast<double>(uni)));
    }
    out.check(worst <= kJaccardTol, "max error " + sci(worst));
    out.detail = out.ok ? "1000 pairs, max error " + sci(worst) : out.detail;
    return out;
}

Outcome energy_correctness() {
    Outcome out;
    Rng rng(2003);
    long long flips = 0;
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const auto s = random_stack(rng, 8, 8);
        const auto img = test::random_image(rng, 8, 8);
        const auto m = random_model(rng);
        const Labeling init = rng.coin() ? first_order_labeling(s) : test::random_mask(rng, 8, 8);
        double prev = total_energy(s, init, img, m);
        IcmOptions opt;
        opt.max_passes = std::numeric_limits<int>::max();
        opt.on_flip = [&](const FlipEvent& ev) {
            const double full = total_energy(s, ev.labels, img, m);
            worst = std::max({worst, std::abs(ev.delta - (full - prev)), std::abs(ev.energy_after - full)});
            prev = full;
            ++flips;
        };
        const auto [labels, report] = icm_refine(s, init, img, m, opt);
        for (std::size_t p = 1; p < report.pass_energies.size(); ++p)
            out.check(report.pass_energies[p] <= report.pass_energies[p - 1], "pass energy rose in instance " + std::to_string(t));
        out.check(report.pass_energies.empty() || report.pass_energies.front() <= report.initial_energy,
                  "first pass rose in instance " + std::to_string(t));
        const double final_full = total_energy(s, labels, img, m);
        for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
            Labeling flipped = labels;
            flipped[i] = static_cast<std::uint8_t>(1 - flipped[i]);
            out.check(total_energy(s, flipped, img, m) >= final_full - kEnergyTol,
                      "improving flip left at pixel " + std::to_string(i) + " of instance " + std::to_string(t));
        }
    }
    out.check(worst <= kEnergyTol, "flip delta error " + sci(worst));
    if (out.ok) out.detail = std::to_string(flips) + " flips, max error " + sci(worst);
    return out;
}

Outcome brute_force_optimality() {
    Outcome out;
    Rng rng(2004);
    for (int t = 0; t < 20; ++t) {
        const auto s = random_stack(rng, 3, 3);
        const auto img = test::random_image(rng, 3, 3);
        const auto m = random_model(rng);
        std::vector<double> e(512);
        for (int code = 0; code < 512; ++code) {
            Labeling l(3, 3);
            for (int b = 0; b < 9; ++b) l[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((code >> b) & 1);
            e[static_cast<std::size_t>(code)] = energy_oracle(s, l, img, m);
        }
        const auto init = first_order_labeling(s);
        const auto [labels, report] = icm_refine(s, init, img, m);
        int code = 0;
        for (int b = 0; b < 9; ++b) code |= labels[static_cast<std::size_t>(b)] << b;
        const double here = e[static_cast<std::size_t>(code)];
        bool local_min = true;
        for (int b = 0; b < 9; ++b) local_min = local_min && here <= e[static_cast<std::size_t>(code ^ (1 << b))] + kEnergyTol;
        const std::string tag = " in instance " + std::to_string(t);
        out.check(local_min, "final labeling is not a single-flip local minimum" + tag);
        out.check(std::abs(report.final_energy - here) <= kEnergyTol, "reported energy differs from enumeration" + tag);
        out.check(report.final_energy <= energy_oracle(s, init, img, m) + kEnergyTol, "worse than first-order" + tag);
    }
    if (out.ok) out.detail = "20 instances, 512 labelings each";
    return out;
}

std::vector<RasterImage> structured_fixtures() {
    std::vector<RasterImage> out;
    out.push_back(test::constant_image(48, 32, {90, 120, 30}));
    out.push_back(test::disc_fixture(64, 20).image);
    RasterImage checker(40, 40), ramp(60, 30), strip(50, 8);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) set_pixel(checker, x, y, ((x / 5 + y / 5) % 2) ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 60; ++x) set_pixel(ramp, x, y, {static_cast<std::uint8_t>(x * 4), 64, static_cast<std::uint8_t>(255 - x * 4)});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 50; ++x) set_pixel(strip, x, y, (x >= 20 && x < 26) ? Rgb{220, 20, 20} : Rgb{20, 60, 20});
    out.push_back(std::move(checker));
    out.push_back(std::move(ramp));
    out.push_back(std::move(strip));
    return out;
}

Outcome saliency_invariants() {
    Outcome out;
    Rng rng(2005);
    std::vector<RasterImage> images = structured_fixtures();
    for (int t = 0; t < 20; ++t) images.push_back(test::random_image(rng, rng.uniform_int(8, 72), rng.uniform_int(8, 72)));
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto& img = images[n];
        const auto stack = build_stack(img);
        const std::string tag = " on fixture " + std::to_string(n);
        out.check(stack.size() == kMapCount, "stack size" + tag);
        for (const auto& e : stack.maps) {
            out.check(e.map.width() == img.width() && e.map.height() == img.height(), e.name + " dimensions" + tag);
            for (double v : e.map.raw()) out.check(v >= 0.0 && v <= 1.0, e.name + " value outside [0,1]" + tag);
        }
    }
    const auto flat = test::constant_image(37, 29, {17, 200, 99});
    const auto flat_contrast = multiscale_contrast(flat);
    const auto flat_cs = center_surround_map(flat);
    for (double v : flat_contrast.raw()) out.check(v == 0.0, "contrast nonzero on constant image");
    for (double v : flat_cs.raw()) out.check(v == 0.0, "center-surround nonzero on constant image");

    const auto bins = quantize_colors(test::random_image(rng, 53, 41), 4);
    const IntegralHistogram ih(bins, 64);
    for (int t = 0; t < 200; ++t) {
        const int x0 = rng.uniform_int(0, 52), x1 = rng.uniform_int(0, 52);
        const int y0 = rng.uniform_int(0, 40), y1 = rng.uniform_int(0, 40);
        const BoundingBox b{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
        std::vector<IntegralHistogram::Count> want(64, 0);
        for (int y = b.y_min; y <= b.y_max; ++y)
            for (int x = b.x_min; x <= b.x_max; ++x) ++want[bins.at(x, y)];
        out.check(region_histogram(ih, b) == want, "integral histogram mismatch on box " + std::to_string(t));
    }
    if (out.ok) out.detail = std::to_string(images.size()) + " fixtures, 200 histogram boxes";
    return out;
}

// Outputs of the synthetic run, kept for the determinism check.
struct SyntheticOutputs {
    std::vector<std::uint8_t> mask_png, desaturated_png, gif;
};

Outcome synthetic_end_to_end(SyntheticOutputs* keep) {
    Outcome out;
    const auto f = test::disc_fixture(128, 40);
    const auto mask = segment_pipeline(f.image);
    const double j = score_mask(mask, f.box);
    out.check(j >= 0.8, "box jaccard " + std::to_string(j));

    const auto gray = desaturate_background(f.image, mask);
    bool preserved = true;
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x)
            if (mask.at(x, y)) preserved = preserved && pixel(gray, x, y) == pixel(f.image, x, y);
    out.check(preserved, "desaturation altered a foreground pixel");

    const WiggleParams params{3, 4, 10};
    const auto gif_bytes = wiggle_gif(f.image, mask, params);
    const auto anim = gif::decode_animation(gif_bytes);
    out.check(anim.frames.size() == static_cast<std::size_t>(params.frames), "gif frame count");
    out.check(anim.width == 128 && anim.height == 128, "gif dimensions");
    for (const auto& fr : anim.frames) out.check(fr.width() == 128 && fr.height() == 128, "gif frame dimensions");

    if (keep) *keep = {io::encode_png(mask), io::encode_png(gray), gif_bytes};
    if (out.ok) out.detail = "box jaccard " + std::to_string(j);
    return out;
}

std::string dataset_fingerprint(const EvalReport& r) { return as_json(r, nlohmann::json::object()).dump() + report_csv(r); }

Outcome desk_regression(std::string* keep) {
    Outcome out;
    const std::filesystem::path csv = std::filesystem::path(SALIEX_TEST_DATA) / "desk20" / "gt.csv";
    std::ifstream in(csv);
    const auto records = parse_ground_truth_csv(in, csv.parent_path(), csv.string());
    out.check(records.size() == 20, "expected 20 records, found " + std::to_string(records.size()));

    const auto full = evaluate_dataset(records);
    PipelineConfig contrast_only;
    contrast_only.saliency.select({MapId::Contrast});
    const auto single = evaluate_dataset(records, contrast_only);
    out.check(full.failures.empty() && single.failures.empty(), "some images failed to process");
    out.check(full.mean_jaccard >= 0.50, "mean jaccard " + std::to_string(full.mean_jaccard));
    out.check(full.mean_jaccard >= single.mean_jaccard - 0.02,
              "K=7 mean " + std::to_string(full.mean_jaccard) + " below K=1 mean " + std::to_string(single.mean_jaccard));
    if (keep) *keep = dataset_fingerprint(full) + dataset_fingerprint(single);
    std::ostringstream d;
    d.precision(4);
    d << std::fixed << "K=7 mean " << full.mean_jaccard << ", K=1 mean " << single.mean_jaccard;
    if (out.ok) out.detail = d.str();
    return out;
}

Outcome determinism(const SyntheticOutputs& first_synthetic, const std::string& first_dataset) {
    Outcome out;
    SyntheticOutputs again;
    synthetic_end_to_end(&again);
    out.check(again.mask_png == first_synthetic.mask_png, "synthetic mask differs between runs");
    out.check(again.desaturated_png == first_synthetic.desaturated_png, "desaturated image differs between runs");
    out.check(again.gif == first_synthetic.gif, "gif differs between runs");
    std::string dataset;
    desk_regression(&dataset);
    out.check(!first_dataset.empty() && dataset == first_dataset, "dataset report differs between runs");
    if (out.ok) out.detail = "synthetic outputs and dataset reports identical";
    return out;
}

} // namespace

int main() {
    int failures = 0;
    auto run = [&](int id, double budget_s, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget_s) o.check(false, "took " + std::to_string(secs) + " s");
        if (!o.ok) ++failures;
        std::printf("criterion %d: %s (%.2f s of %.0f s) %s\n", id, o.ok ? "PASS" : "FAIL", secs, budget_s, o.detail.c_str());
        std::fflush(stdout);
    };

    SyntheticOutputs synthetic;
    std::string dataset;
    run(2, 5, jaccard_oracle);
    run(3, 30, energy_correctness);
    run(4, 10, brute_force_optimality);
    run(5, 60, saliency_invariants);
    run(6, 30, [&] { return synthetic_end_to_end(&synthetic); });
    run(7, 600, [&] { return desk_regression(&dataset); });
    run(8, 660, [&] { return determinism(synthetic, dataset); });
    return failures == 0 ? 0 : 1;
}
