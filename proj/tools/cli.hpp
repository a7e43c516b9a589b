#pragma once

// Command-line front end. Exit status: 0 success, 1 usage error, 2 processing
// error. Diagnostics go to `err`; data goes to files or `out`.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saliex/saliex.hpp"

namespace saliex::cli {

namespace fs = std::filesystem;

enum class LogLevel { Quiet = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("SALIEX_LOG");
    if (v == nullptr) return LogLevel::Warn;
    const std::string s(v);
    if (s == "quiet" || s == "off") return LogLevel::Quiet;
    if (s == "error") return LogLevel::Error;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

class Log {
public:
    Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
    void error(const std::string& m) const { emit(LogLevel::Error, "error", m); }
    void warn(const std::string& m) const { emit(LogLevel::Warn, "warning", m); }
    void info(const std::string& m) const { emit(LogLevel::Info, "info", m); }
    void debug(const std::string& m) const { emit(LogLevel::Debug, "debug", m); }

private:
    void emit(LogLevel at, const char* tag, const std::string& m) const {
        if (static_cast<int>(level_) >= static_cast<int>(at)) err_ << "saliex: " << tag << ": " << m << '\n';
    }
    std::ostream& err_;
    LogLevel level_;
};

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string maps;
};

inline void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config, "Flat key = value run configuration")->check(CLI::ExistingFile);
    cmd.add_option("--seed", o.seed, "Random seed for mixture initialization (default 42)");
    cmd.add_option("--maps", o.maps, "Comma-separated maps to enable, or 'all'");
}

inline RunConfig resolve_config(const CommonOptions& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.seed) apply_config_value(cfg, "seed", std::to_string(*o.seed));
    if (!o.maps.empty()) apply_config_value(cfg, "maps", o.maps);
    return cfg;
}

inline BinaryMask mask_for(const RasterImage& img, const std::string& mask_path, const RunConfig& cfg, const Log& log) {
    if (!mask_path.empty()) {
        BinaryMask mask = io::read_mask(mask_path);
        require_same_dims(img, mask, "mask");
        return mask;
    }
    log.info("no --mask given, segmenting the input");
    return segment_pipeline(img, cfg.pipeline);
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const Log log(err, log_level_from_env());
    CLI::App app{"Salient object detection, background desaturation and wiggle GIFs", "saliex"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // saliency
    CommonOptions sal_common;
    std::string sal_in;
    std::string sal_out_dir;
    auto* sal = app.add_subcommand("saliency", "Write every enabled saliency map as PNG plus a JSON manifest");
    sal->add_option("--in", sal_in, "Input image (PNG or JPEG)")->required();
    sal->add_option("--out-dir", sal_out_dir, "Output directory")->required();
    add_common(*sal, sal_common);

    // segment
    CommonOptions seg_common;
    std::string seg_in;
    std::string seg_out;
    std::string seg_report;
    auto* seg = app.add_subcommand("segment", "Fuse the maps into a binary mask");
    seg->add_option("--in", seg_in, "Input image")->required();
    seg->add_option("--out", seg_out, "Mask PNG (0/255)")->required();
    seg->add_option("--report", seg_report, "ICM report JSON");
    add_common(*seg, seg_common);

    // desaturate
    CommonOptions des_common;
    std::string des_in;
    std::string des_out;
    std::string des_mask;
    std::optional<int> des_feather;
    auto* des = app.add_subcommand("desaturate", "Gray out everything outside the salient object");
    des->add_option("--in", des_in, "Input image")->required();
    des->add_option("--out", des_out, "Output PNG")->required();
    des->add_option("--mask", des_mask, "Precomputed mask PNG; segments the input when omitted");
    des->add_option("--feather", des_feather, "Mask blur radius in pixels (default 0)");
    add_common(*des, des_common);

    // gif
    CommonOptions gif_common;
    std::string gif_in;
    std::string gif_out;
    std::string gif_mask;
    std::optional<int> gif_shift;
    std::optional<int> gif_frames;
    auto* gifc = app.add_subcommand("gif", "Write a looping parallax (wiggle) GIF");
    gifc->add_option("--in", gif_in, "Input image")->required();
    gifc->add_option("--out", gif_out, "Output GIF")->required();
    gifc->add_option("--mask", gif_mask, "Precomputed mask PNG; segments the input when omitted");
    gifc->add_option("--shift", gif_shift, "Foreground shift amplitude in pixels (default 4)");
    gifc->add_option("--frames", gif_frames, "Frame count (default 2)");
    add_common(*gifc, gif_common);

    // evaluate
    CommonOptions ev_common;
    std::string ev_gt;
    std::string ev_report;
    std::string ev_out_dir;
    std::optional<unsigned> ev_jobs;
    auto* ev = app.add_subcommand("evaluate", "Score masks against ground-truth boxes (Jaccard index)");
    ev->add_option("--gt", ev_gt, "Ground-truth CSV or VOC annotation directory")->required();
    ev->add_option("--report", ev_report, "Report JSON; a CSV with the same stem is written next to it");
    ev->add_option("--out-dir", ev_out_dir, "Also write each predicted mask here");
    ev->add_option("--jobs", ev_jobs, "Parallel per-image workers (default 1)");
    add_common(*ev, ev_common);

    // ingest
    std::string in_gt;
    std::string in_out;
    auto* ing = app.add_subcommand("ingest", "Convert VOC XML annotations (single-object only) to CSV");
    ing->add_option("--gt", in_gt, "VOC annotation directory or CSV file")->required();
    ing->add_option("--out", in_out, "Output CSV; stdout when omitted");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        // Subcommand --help is reported with the subcommand as the parse context.
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            for (auto* sub : app.get_subcommands()) out << sub->help();
            return 0;
        }
        err << "saliex: " << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (*sal) {
            const RunConfig cfg = resolve_config(sal_common);
            const RasterImage img = io::read_image(sal_in);
            const SaliencyStack stack = build_stack(img, cfg.pipeline.saliency);
            std::vector<std::string> files;
            for (const auto& e : stack.maps) {
                const fs::path file = fs::path(sal_out_dir) / (e.name + ".png");
                io::write_png(file, e.map);
                files.push_back(file.filename().string());
                log.info("wrote " + file.string());
            }
            io::write_text(fs::path(sal_out_dir) / "manifest.json", dump(stack_manifest(stack, files, as_json(cfg))));
            return 0;
        }
        if (*seg) {
            const RunConfig cfg = resolve_config(seg_common);
            const RasterImage img = io::read_image(seg_in);
            const SegmentResult r = segment_image(img, cfg.pipeline);
            io::write_png(seg_out, r.mask);
            if (!seg_report.empty()) {
                nlohmann::json j = as_json(r.report);
                j["gamma"] = r.model.pairwise_strength;
                j["beta"] = r.model.color_decay;
                io::write_text(seg_report, dump(j));
            }
            log.info("ICM: " + std::to_string(r.report.passes) + " passes, " + std::to_string(r.report.flips) + " flips");
            return 0;
        }
        if (*des) {
            RunConfig cfg = resolve_config(des_common);
            if (des_feather) apply_config_value(cfg, "feather", std::to_string(*des_feather));
            const RasterImage img = io::read_image(des_in);
            const BinaryMask mask = mask_for(img, des_mask, cfg, log);
            io::write_png(des_out, desaturate_background(img, mask, cfg.feather));
            return 0;
        }
        if (*gifc) {
            RunConfig cfg = resolve_config(gif_common);
            if (gif_shift) apply_config_value(cfg, "wiggle.shift", std::to_string(*gif_shift));
            if (gif_frames) apply_config_value(cfg, "wiggle.frames", std::to_string(*gif_frames));
            const RasterImage img = io::read_image(gif_in);
            const BinaryMask mask = mask_for(img, gif_mask, cfg, log);
            io::write_file(gif_out, wiggle_gif(img, mask, cfg.wiggle));
            return 0;
        }
        if (*ev) {
            RunConfig cfg = resolve_config(ev_common);
            if (ev_jobs) apply_config_value(cfg, "jobs", std::to_string(*ev_jobs));
            std::vector<std::string> warnings;
            const auto records = ingest_ground_truth(ev_gt, &warnings);
            for (const auto& w : warnings) log.warn(w);
            const EvalReport report = evaluate_dataset(records, cfg.pipeline, cfg.jobs);
            for (const auto& f : report.failures) log.warn(f.image_path.string() + ": " + f.error);
            if (!ev_report.empty()) {
                io::write_text(ev_report, dump(as_json(report, as_json(cfg))));
                io::write_text(fs::path(ev_report).replace_extension(".csv"), report_csv(report));
            }
            if (!ev_out_dir.empty()) {
                for (const auto& s : report.scores) {
                    const RasterImage img = io::read_image(s.image_path);
                    io::write_png(fs::path(ev_out_dir) / (s.image_path.stem().string() + "_mask.png"),
                                  segment_pipeline(img, cfg.pipeline));
                }
            }
            out << histogram_chart(report);
            return 0;
        }
        if (*ing) {
            std::vector<std::string> warnings;
            const auto records = ingest_ground_truth(in_gt, &warnings);
            for (const auto& w : warnings) log.warn(w);
            const std::string csv = ground_truth_to_csv(records);
            if (in_out.empty()) out << csv;
            else io::write_text(in_out, csv);
            log.info(std::to_string(records.size()) + " records");
            return 0;
        }
    } catch (const Error& e) {
        log.error(e.what());
        return e.code() == ErrorCode::ConfigError ? 1 : 2;
    } catch (const std::exception& e) {
        log.error(e.what());
        return 2;
    }
    return 1;
}

inline int run_command(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, out, err);
}

} // namespace saliex::cli
