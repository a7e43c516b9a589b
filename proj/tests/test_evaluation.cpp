#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"

using namespace saliex;
using saliex::test::Rng;
namespace fs = std::filesystem;

static long long box_pixels_oracle(const BoundingBox& a, const BoundingBox& b, bool intersect) {
    long long n = 0;
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) {
            const bool ia = a.contains(x, y), ib = b.contains(x, y);
            n += intersect ? (ia && ib) : (ia || ib);
        }
    return n;
}

static BoundingBox random_box(Rng& rng, int size) {
    const int x0 = rng.uniform_int(0, size - 1), x1 = rng.uniform_int(0, size - 1);
    const int y0 = rng.uniform_int(0, size - 1), y1 = rng.uniform_int(0, size - 1);
    return {std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1)};
}

TEST(BoundingBox, FromMask) {
    BinaryMask m(8, 8);
    m.at(3, 4) = 1;
    EXPECT_EQ(mask_bounding_box(m), (BoundingBox{3, 4, 3, 4}));
    BinaryMask two(8, 8);
    two.at(1, 1) = two.at(5, 2) = 1;
    EXPECT_EQ(mask_bounding_box(two), (BoundingBox{1, 1, 5, 2}));
    try {
        mask_bounding_box(BinaryMask(3, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
    }
}

TEST(BoundingBox, MatchesScanOracle) {
    Rng rng(50);
    for (int t = 0; t < 50; ++t) {
        const auto m = test::random_mask(rng, 30, 20, 0.01);
        std::vector<std::pair<int, int>> pts;
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 30; ++x)
                if (m.at(x, y)) pts.emplace_back(x, y);
        if (pts.empty()) continue;
        BoundingBox o{pts[0].first, pts[0].second, pts[0].first, pts[0].second};
        for (auto [x, y] : pts) o = {std::min(o.x_min, x), std::min(o.y_min, y), std::max(o.x_max, x), std::max(o.y_max, y)};
        EXPECT_EQ(mask_bounding_box(m), o);
    }
}

TEST(Jaccard, Examples) {
    EXPECT_EQ(jaccard_index({0, 0, 9, 9}, {0, 0, 9, 9}), 1.0);
    EXPECT_EQ(jaccard_index({0, 0, 9, 9}, {10, 0, 19, 9}), 0.0);
    EXPECT_DOUBLE_EQ(jaccard_index({0, 0, 9, 9}, {5, 5, 14, 14}), 25.0 / 175.0);
    EXPECT_EQ(jaccard_index({4, 4, 4, 4}, {4, 4, 4, 4}), 1.0);
    EXPECT_THROW(jaccard_index({5, 0, 4, 3}, {0, 0, 1, 1}), Error);
}

TEST(Jaccard, MatchesPixelEnumerationAndIsSymmetric) {
    Rng rng(51);
    for (int t = 0; t < 300; ++t) {
        const auto a = random_box(rng, 100), b = random_box(rng, 100);
        const double want = static_cast<double>(box_pixels_oracle(a, b, true)) / static_cast<double>(box_pixels_oracle(a, b, false));
        EXPECT_NEAR(jaccard_index(a, b), want, 1e-12);
        EXPECT_EQ(jaccard_index(a, b), jaccard_index(b, a));
        EXPECT_EQ(jaccard_index(a, a), 1.0);
    }
}

TEST(Histogram, BinsAndMean) {
    EXPECT_EQ(histogram_bin(0.0), 0);
    EXPECT_EQ(histogram_bin(0.2), 2);
    EXPECT_EQ(histogram_bin(0.6), 6);
    EXPECT_EQ(histogram_bin(0.95), 9);
    EXPECT_EQ(histogram_bin(1.0), 9);

    const auto r = aggregate({{"a.png", {}, std::nullopt, 0.2}, {"b.png", {}, std::nullopt, 0.6}}, {});
    EXPECT_DOUBLE_EQ(r.mean_jaccard, 0.4);
    for (int b = 0; b < kHistogramBins; ++b) EXPECT_EQ(r.histogram[static_cast<std::size_t>(b)], (b == 2 || b == 6) ? 1 : 0);
    const std::string chart = histogram_chart(r);
    EXPECT_NE(chart.find("[0.9,1.0]"), std::string::npos);
    EXPECT_NE(chart.find("mean jaccard 0.4000 over 2 images"), std::string::npos);
}

TEST(Scoring, EmptyMaskScoresZero) {
    std::optional<BoundingBox> pred = BoundingBox{0, 0, 0, 0};
    EXPECT_EQ(score_mask(BinaryMask(5, 5), {0, 0, 2, 2}, &pred), 0.0);
    EXPECT_FALSE(pred.has_value());
}

TEST(GroundTruthCsv, ParsesWithAndWithoutHeader) {
    std::istringstream in("\xEF\xBB\xBFimage_path,x_min,y_min,x_max,y_max\nimg/bird.jpg,10,20,110,90\n\n/abs/cat.png, 1 ,2,3,4\r\n");
    const auto recs = parse_ground_truth_csv(in, "/data");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].image_path, fs::path("/data/img/bird.jpg"));
    EXPECT_EQ(recs[0].box, (BoundingBox{10, 20, 110, 90}));
    EXPECT_EQ(recs[1].image_path, fs::path("/abs/cat.png"));
    EXPECT_EQ(recs[1].box, (BoundingBox{1, 2, 3, 4}));

    std::istringstream bare("x.png,0,0,5,5\n");
    EXPECT_EQ(parse_ground_truth_csv(bare, ".").size(), 1u);
    std::istringstream empty("");
    EXPECT_TRUE(parse_ground_truth_csv(empty, ".").empty());
}

TEST(GroundTruthCsv, ErrorsCarryLineNumbers) {
    for (const std::string bad : {"a.png,1,2,3\n", "a.png,1,2,3,4\nb.png,x,2,3,4\n", "a.png,5,2,3,4\n", "a.png,-1,0,3,4\n"}) {
        std::istringstream in(bad);
        try {
            parse_ground_truth_csv(in, ".", "gt.csv");
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError);
            EXPECT_NE(std::string(e.what()).find("gt.csv:"), std::string::npos) << e.what();
        }
    }
}

static void write_voc(const fs::path& file, const std::string& name, const std::vector<std::array<int, 4>>& boxes) {
    std::ofstream out(file);
    out << "<annotation>\n  <folder>VOC2007</folder>\n  <filename>" << name << "</filename>\n";
    for (const auto& b : boxes)
        out << "  <object>\n    <name>bird</name>\n    <bndbox><xmin>" << b[0] << "</xmin><ymin>" << b[1] << "</ymin><xmax>"
            << b[2] << "</xmax><ymax>" << b[3] << "</ymax></bndbox>\n  </object>\n";
    out << "</annotation>\n";
}

TEST(GroundTruthVoc, KeepsSingleObjectFilesOnly) {
    const auto root = test::temp_dir("voc");
    fs::create_directories(root / "Annotations");
    fs::create_directories(root / "JPEGImages");
    write_voc(root / "Annotations" / "000001.xml", "000001.jpg", {{11, 21, 111, 91}});
    write_voc(root / "Annotations" / "000002.xml", "000002.jpg", {{1, 1, 5, 5}, {7, 7, 9, 9}});
    write_voc(root / "Annotations" / "000003.xml", "000003.jpg", {{2, 3, 4, 5}});
    std::vector<std::string> warnings;
    const auto recs = ingest_ground_truth(root / "Annotations", &warnings);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].image_path, (root / "JPEGImages" / "000001.jpg").lexically_normal());
    EXPECT_EQ(recs[0].box, (BoundingBox{10, 20, 110, 90}));
    EXPECT_EQ(recs[1].box, (BoundingBox{1, 2, 3, 4}));
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("000002.xml"), std::string::npos);

    const std::string csv = ground_truth_to_csv(recs);
    std::istringstream back(csv);
    const auto again = parse_ground_truth_csv(back, "/");
    ASSERT_EQ(again.size(), 2u);
    EXPECT_EQ(again[1].box, recs[1].box);
}

TEST(GroundTruthVoc, MalformedXmlIsParseError) {
    const auto root = test::temp_dir("voc_bad");
    io::write_text(root / "bad.xml", "<annotation><object>");
    try {
        ingest_ground_truth(root);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("bad.xml"), std::string::npos);
    }
}

TEST(EvaluateDataset, ScoresImagesAndRecordsFailures) {
    const auto dir = test::temp_dir("eval");
    const auto f = test::disc_fixture(64, 18);
    io::write_png(dir / "disc.png", f.image);
    const std::vector<GroundTruthRecord> recs{{dir / "disc.png", f.box}, {dir / "missing.png", {0, 0, 4, 4}}};
    const auto r = evaluate_dataset(recs, {}, 2);
    ASSERT_EQ(r.scores.size(), 1u);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].image_path, dir / "missing.png");
    EXPECT_GT(r.scores[0].jaccard, 0.8);
    EXPECT_EQ(r.mean_jaccard, r.scores[0].jaccard);
    int total = 0;
    for (int c : r.histogram) total += c;
    EXPECT_EQ(total, 1);

    const auto serial = evaluate_dataset(recs, {}, 1);
    EXPECT_EQ(serial.scores[0].jaccard, r.scores[0].jaccard);
    EXPECT_EQ(report_csv(serial), report_csv(r));
}

TEST(EvaluateDataset, EmptyInputIsAnError) {
    try {
        evaluate_dataset({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
    }
}
