#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "test_util.hpp"

using namespace saliex;
namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out;
    std::string err;
};

static Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = test::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        const auto f = test::disc_fixture(48, 14);
        box = f.box;
        image = dir / "disc.png";
        mask = dir / "disc_mask.png";
        io::write_png(image, f.image);
        io::write_png(mask, f.truth);
    }
    fs::path dir, image, mask;
    BoundingBox box;
};

TEST_F(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("saliency"), std::string::npos);
    const auto sub = run({"segment", "--help"});
    EXPECT_EQ(sub.code, 0);
    EXPECT_NE(sub.out.find("--report"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"segment", "--in", image.string()}).code, 1);
    EXPECT_EQ(run({"segment", "--in", image.string(), "--out", (dir / "m.png").string(), "--maps", "bogus"}).code, 1);
}

TEST_F(Cli, ProcessingErrorsExitTwo) {
    const auto r = run({"segment", "--in", (dir / "nope.png").string(), "--out", (dir / "m.png").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("nope.png"), std::string::npos);
    const auto shift = run({"gif", "--in", image.string(), "--mask", mask.string(), "--out", (dir / "w.gif").string(),
                            "--shift", "48"});
    EXPECT_EQ(shift.code, 2);
}

TEST_F(Cli, SaliencyWritesEveryMapAndManifest) {
    const auto out_dir = dir / "maps";
    ASSERT_EQ(run({"saliency", "--in", image.string(), "--out-dir", out_dir.string()}).code, 0);
    for (MapId id : kAllMaps) {
        const auto png = io::read_image(out_dir / (std::string(map_name(id)) + ".png"));
        EXPECT_EQ(png.width(), 48);
    }
    std::ifstream in(out_dir / "manifest.json");
    const auto j = nlohmann::json::parse(in);
    ASSERT_EQ(j["maps"].size(), 7u);
    EXPECT_EQ(j["maps"][0]["name"], "contrast");
    EXPECT_EQ(j["width"], 48);
}

TEST_F(Cli, SegmentWritesMaskAndReport) {
    const auto out = dir / "mask.png";
    const auto report = dir / "icm.json";
    ASSERT_EQ(run({"segment", "--in", image.string(), "--out", out.string(), "--report", report.string()}).code, 0);
    const auto m = io::read_mask(out);
    EXPECT_GT(jaccard_index(mask_bounding_box(m), box), 0.8);
    std::ifstream in(report);
    const auto j = nlohmann::json::parse(in);
    for (const char* key : {"initial_energy", "final_energy", "passes", "flips", "gamma", "beta"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_LE(j["final_energy"].get<double>(), j["initial_energy"].get<double>());
}

TEST_F(Cli, ConfigFileAndSeedOverride) {
    const auto cfg = dir / "run.cfg";
    io::write_text(cfg, "# contrast only\nmaps = contrast\nenergy.gamma = 1.5\n");
    const auto out = dir / "maps";
    ASSERT_EQ(run({"saliency", "--in", image.string(), "--out-dir", out.string(), "--config", cfg.string(), "--seed", "7"}).code, 0);
    EXPECT_TRUE(fs::exists(out / "contrast.png"));
    EXPECT_FALSE(fs::exists(out / "content.png"));

    io::write_text(cfg, "no_such_key = 1\n");
    const auto bad = run({"saliency", "--in", image.string(), "--out-dir", out.string(), "--config", cfg.string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("no_such_key"), std::string::npos);
}

TEST_F(Cli, DesaturateAndGif) {
    const auto gray = dir / "gray.png";
    ASSERT_EQ(run({"desaturate", "--in", image.string(), "--mask", mask.string(), "--out", gray.string()}).code, 0);
    const auto g = io::read_image(gray);
    EXPECT_EQ(pixel(g, 24, 24), (Rgb{240, 200, 30}));
    EXPECT_EQ(g.at(0, 0, 0), g.at(0, 0, 2));

    const auto gif_path = dir / "wiggle.gif";
    ASSERT_EQ(run({"gif", "--in", image.string(), "--out", gif_path.string(), "--frames", "3"}).code, 0);
    const auto anim = gif::decode_animation(io::read_file(gif_path));
    EXPECT_EQ(anim.frames.size(), 3u);
    EXPECT_EQ(anim.width, 48);
}

TEST_F(Cli, EvaluateAndIngest) {
    const auto f2 = test::disc_fixture(40, 10, {200, 200, 200}, {20, 20, 20});
    io::write_png(dir / "dark.png", f2.image);
    io::write_text(dir / "gt.csv", "image_path,x_min,y_min,x_max,y_max\ndisc.png," + std::to_string(box.x_min) + "," +
                                       std::to_string(box.y_min) + "," + std::to_string(box.x_max) + "," +
                                       std::to_string(box.y_max) + "\ndark.png," + std::to_string(f2.box.x_min) + "," +
                                       std::to_string(f2.box.y_min) + "," + std::to_string(f2.box.x_max) + "," +
                                       std::to_string(f2.box.y_max) + "\n");
    const auto report = dir / "out" / "report.json";
    const auto r = run({"evaluate", "--gt", (dir / "gt.csv").string(), "--report", report.string(), "--out-dir",
                        (dir / "masks").string(), "--jobs", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("over 2 images"), std::string::npos);
    std::ifstream in(report);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["images"].size(), 2u);
    EXPECT_GT(j["mean_jaccard"].get<double>(), 0.7);
    EXPECT_TRUE(j.contains("config"));
    EXPECT_TRUE(fs::exists(dir / "out" / "report.csv"));
    EXPECT_TRUE(fs::exists(dir / "masks" / "disc_mask.png"));

    const auto ing = run({"ingest", "--gt", (dir / "gt.csv").string()});
    EXPECT_EQ(ing.code, 0);
    EXPECT_NE(ing.out.find("disc.png,"), std::string::npos);
}

TEST(CliBinary, ExitStatusFromProcess) {
    const std::string cli = SALIEX_CLI_PATH;
    EXPECT_EQ(std::system((cli + " --help > /dev/null").c_str()), 0);
    EXPECT_EQ(WEXITSTATUS(std::system((cli + " bogus > /dev/null 2>&1").c_str())), 1);
}
