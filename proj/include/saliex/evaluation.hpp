#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/io.hpp"
#include "saliex/parallel.hpp"
#include "saliex/segmentation.hpp"

namespace saliex {

namespace fs = std::filesystem;

/// Smallest inclusive box around the foreground.
inline BoundingBox mask_bounding_box(const BinaryMask& mask) {
    BoundingBox box{mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                box.x_min = std::min(box.x_min, x);
                box.y_min = std::min(box.y_min, y);
                box.x_max = std::max(box.x_max, x);
                box.y_max = std::max(box.y_max, y);
            }
    if (box.x_max < 0) fail(ErrorCode::EmptyMask, "mask has no foreground pixels");
    return box;
}

/// |A n B| / |A u B| over pixel-inclusive boxes.
inline double jaccard_index(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) fail(ErrorCode::InvalidRegion, "jaccard_index needs valid boxes");
    const long long ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1LL;
    const long long iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1LL;
    const long long inter = (ix > 0 && iy > 0) ? ix * iy : 0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// Ground truth

struct GroundTruthRecord {
    fs::path image_path;
    BoundingBox box;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::optional<int> parse_int(const std::string& s) {
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

} // namespace detail

/// `image_path,x_min,y_min,x_max,y_max` per line; an optional header line is
/// skipped. Relative image paths resolve against the CSV's directory.
inline std::vector<GroundTruthRecord> parse_ground_truth_csv(std::istream& in, const fs::path& base_dir,
                                                             const std::string& source = "<csv>") {
    std::vector<GroundTruthRecord> records;
    std::string line;
    int line_no = 0;
    bool seen_data_or_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = detail::split_csv_line(trimmed);
        auto where = [&] { return source + ":" + std::to_string(line_no); };
        if (fields.size() != 5) fail(ErrorCode::ParseError, where() + ": expected 5 fields, got " + std::to_string(fields.size()));
        std::array<std::optional<int>, 4> v{detail::parse_int(fields[1]), detail::parse_int(fields[2]),
                                            detail::parse_int(fields[3]), detail::parse_int(fields[4])};
        const bool numeric = std::all_of(v.begin(), v.end(), [](const auto& o) { return o.has_value(); });
        if (!numeric) {
            if (!seen_data_or_header) {
                seen_data_or_header = true;
                continue; // header
            }
            fail(ErrorCode::ParseError, where() + ": coordinates must be integers");
        }
        seen_data_or_header = true;
        const BoundingBox box{*v[0], *v[1], *v[2], *v[3]};
        if (!box.valid() || box.x_min < 0 || box.y_min < 0)
            fail(ErrorCode::ParseError, where() + ": box must satisfy 0 <= min <= max");
        if (fields[0].empty()) fail(ErrorCode::ParseError, where() + ": empty image path");
        fs::path p(fields[0]);
        if (p.is_relative()) p = base_dir / p;
        records.push_back({p.lexically_normal(), box});
    }
    return records;
}

/// Single-object VOC annotation; returns nullopt (and a warning) for files
/// with zero or several objects. VOC pixel coordinates are 1-based.
inline std::optional<GroundTruthRecord> parse_voc_annotation(const fs::path& xml_path, const fs::path& image_dir,
                                                             std::vector<std::string>* warnings) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_xml(xml_path.string(), tree);
    } catch (const pt::xml_parser_error& e) {
        fail(ErrorCode::ParseError, xml_path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    const auto annotation = tree.get_child_optional("annotation");
    if (!annotation) fail(ErrorCode::ParseError, xml_path.string() + ": missing <annotation>");
    std::vector<const pt::ptree*> objects;
    for (const auto& [key, child] : *annotation)
        if (key == "object") objects.push_back(&child);
    if (objects.size() != 1) {
        if (warnings)
            warnings->push_back(xml_path.string() + ": skipped, " + std::to_string(objects.size()) +
                                " objects (need exactly one)");
        return std::nullopt;
    }
    try {
        const std::string filename = detail::trim(annotation->get<std::string>("filename"));
        const auto& bb = objects.front()->get_child("bndbox");
        auto coord = [&](const char* key) {
            const double v = std::stod(detail::trim(bb.get<std::string>(key)));
            return static_cast<int>(std::lround(v)) - 1;
        };
        const BoundingBox box{coord("xmin"), coord("ymin"), coord("xmax"), coord("ymax")};
        if (!box.valid() || box.x_min < 0 || box.y_min < 0)
            fail(ErrorCode::ParseError, xml_path.string() + ": invalid bndbox");
        return GroundTruthRecord{(image_dir / filename).lexically_normal(), box};
    } catch (const pt::ptree_error& e) {
        fail(ErrorCode::ParseError, xml_path.string() + ": " + e.what());
    } catch (const std::logic_error& e) {
        fail(ErrorCode::ParseError, xml_path.string() + ": non-numeric bndbox coordinate");
    }
}

/// Reads a CSV file, or a directory of VOC XML annotations (sorted by file
/// name). VOC images are looked up in a sibling JPEGImages directory when one
/// exists, else next to the annotations.
inline std::vector<GroundTruthRecord> ingest_ground_truth(const fs::path& path, std::vector<std::string>* warnings = nullptr) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        const fs::path sibling = path.parent_path() / "JPEGImages";
        const fs::path image_dir = fs::is_directory(sibling) ? sibling : path;
        std::vector<GroundTruthRecord> records;
        for (const auto& f : files)
            if (auto rec = parse_voc_annotation(f, image_dir, warnings)) records.push_back(std::move(*rec));
        return records;
    }
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return parse_ground_truth_csv(in, path.parent_path(), path.string());
}

inline std::string ground_truth_to_csv(const std::vector<GroundTruthRecord>& records) {
    std::ostringstream out;
    out << "image_path,x_min,y_min,x_max,y_max\n";
    for (const auto& r : records)
        out << r.image_path.generic_string() << ',' << r.box.x_min << ',' << r.box.y_min << ',' << r.box.x_max << ','
            << r.box.y_max << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Dataset evaluation

inline constexpr int kHistogramBins = 10;

struct ImageScore {
    fs::path image_path;
    BoundingBox ground_truth;
    std::optional<BoundingBox> predicted; // empty when the mask was empty
    double jaccard = 0.0;
};

struct ImageFailure {
    fs::path image_path;
    std::string error;
};

struct EvalReport {
    std::vector<ImageScore> scores;
    std::vector<ImageFailure> failures;
    double mean_jaccard = 0.0;
    std::array<int, kHistogramBins> histogram{};
};

/// Bin of width 0.1; the last bin includes 1.0.
inline int histogram_bin(double jaccard) noexcept {
    return std::clamp(static_cast<int>(std::floor(jaccard * kHistogramBins)), 0, kHistogramBins - 1);
}

inline double score_mask(const BinaryMask& mask, const BoundingBox& truth, std::optional<BoundingBox>* predicted = nullptr) {
    BoundingBox box;
    try {
        box = mask_bounding_box(mask);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyMask) throw;
        if (predicted) predicted->reset();
        return 0.0;
    }
    if (predicted) *predicted = box;
    return jaccard_index(box, truth);
}

/// Aggregates per-image results (in record order) into mean and histogram.
inline EvalReport aggregate(std::vector<ImageScore> scores, std::vector<ImageFailure> failures) {
    EvalReport report;
    report.scores = std::move(scores);
    report.failures = std::move(failures);
    double sum = 0.0;
    for (const auto& s : report.scores) {
        sum += s.jaccard;
        ++report.histogram[static_cast<std::size_t>(histogram_bin(s.jaccard))];
    }
    report.mean_jaccard = report.scores.empty() ? 0.0 : sum / static_cast<double>(report.scores.size());
    return report;
}

/// Segments every record's image and scores the mask's box against the
/// ground truth. Unreadable images are reported as failures, not scored.
inline EvalReport evaluate_dataset(const std::vector<GroundTruthRecord>& records, const PipelineConfig& cfg = {},
                                   unsigned jobs = 1) {
    if (records.empty()) fail(ErrorCode::EmptyDataset, "no ground-truth records to evaluate");
    struct Slot {
        std::optional<ImageScore> score;
        std::optional<std::string> error;
    };
    std::vector<Slot> slots(records.size());
    PipelineConfig per_image = cfg;
    if (jobs > 1) per_image.saliency.parallel = false;
    parallel_for(
        records.size(),
        [&](std::size_t i) {
            const auto& rec = records[i];
            try {
                const RasterImage img = io::read_image(rec.image_path);
                if (!rec.box.within(img.width(), img.height()))
                    fail(ErrorCode::InvalidRegion, "ground-truth box lies outside the image");
                ImageScore s{rec.image_path, rec.box, std::nullopt, 0.0};
                s.jaccard = score_mask(segment_pipeline(img, per_image), rec.box, &s.predicted);
                slots[i].score = std::move(s);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        },
        std::max(1u, jobs));

    std::vector<ImageScore> scores;
    std::vector<ImageFailure> failures;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].score) scores.push_back(std::move(*slots[i].score));
        else failures.push_back({records[i].image_path, slots[i].error.value_or("unknown error")});
    }
    return aggregate(std::move(scores), std::move(failures));
}

// ---------------------------------------------------------------------------
// Report rendering

inline std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "path,jaccard\n" << std::setprecision(17);
    for (const auto& s : report.scores) out << s.image_path.generic_string() << ',' << s.jaccard << '\n';
    return out.str();
}

inline std::string histogram_chart(const EvalReport& report, int bar_width = 40) {
    const int peak = std::max(1, *std::max_element(report.histogram.begin(), report.histogram.end()));
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    for (int b = 0; b < kHistogramBins; ++b) {
        const int count = report.histogram[static_cast<std::size_t>(b)];
        const int len = static_cast<int>(std::lround(static_cast<double>(count) * bar_width / peak));
        out << '[' << b / 10.0 << ',' << (b + 1) / 10.0 << (b == kHistogramBins - 1 ? ']' : ')') << ' '
            << std::string(static_cast<std::size_t>(len), '#') << ' ' << count << '\n';
    }
    out << std::setprecision(4) << "mean jaccard " << report.mean_jaccard << " over " << report.scores.size()
        << " images";
    if (!report.failures.empty()) out << " (" << report.failures.size() << " failed)";
    out << '\n';
    return out.str();
}

} // namespace saliex
