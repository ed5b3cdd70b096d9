#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "has/eval.hpp"
#include "has/io.hpp"
#include "has/synth.hpp"
#include "support.hpp"

using namespace has;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

RunResult run(const test::TempDir& dir, const std::string& args) {
    const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
    const std::string cmd = std::string(HAS_SEG_BINARY) + " " + args + " >" + out + " 2>" + err;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int nonzero_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line); // header
    int n = 0;
    while (std::getline(in, line))
        n += line.substr(line.find(',') + 1) != "0";
    return n;
}

const char* kThreeMaterialCfg = "width = 512\n"
                                "height = 512\n"
                                "layout = rectangles-with-vias\n"
                                "via_size = 8\n"
                                "seed = 1\n"
                                "material = 60 12\n"
                                "material = 130 12\n"
                                "material = 210 12\n";

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

} // namespace

TEST(CliSegment, PhantomHasThreeRegions) {
    test::TempDir dir("cli");
    save_image(generate_phantom(test::three_material_spec()).image, dir.file("in.png"));
    const RunResult r = run(dir, "segment " + dir.file("in.png") + " --kernel 3 --rule histogram --out " +
                                     dir.file("labels.png"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(count_lines(slurp(dir.file("labels.regions.txt"))), 3);
    std::size_t w = 0, h = 0;
    load_rgb(dir.file("labels.png"), &w, &h);
    EXPECT_EQ(w, 512u);
}

TEST(CliSegment, ConstantImageIsOneRegion) {
    test::TempDir dir("cli");
    save_image(GrayImage(20, 10, 77), dir.file("flat.pgm"));
    const RunResult r = run(dir, "segment " + dir.file("flat.pgm"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(slurp(dir.file("flat.labels.regions.txt")), "0 0 255 77\n");
    std::size_t w = 0, h = 0;
    const auto rgb = load_rgb(dir.file("flat.labels.png"), &w, &h);
    EXPECT_TRUE(std::all_of(rgb.begin(), rgb.end(), [&](const Rgb& c) { return c == rgb.front(); }));
}

TEST(CliSegment, MissingInputNamesPath) {
    test::TempDir dir("cli");
    const std::string missing = dir.file("nope.png");
    const RunResult r = run(dir, "segment " + missing);
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST(CliSegment, DebugDumpWritesCsvs) {
    test::TempDir dir("cli");
    save_image(generate_phantom(test::three_material_spec(8.0)).image, dir.file("in.pgm"));
    const RunResult r = run(dir, "segment " + dir.file("in.pgm") + " --debug-dump --threads 3 --out " +
                                     dir.file("seg.png"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(count_lines(slurp(dir.file("seg.histogram.csv"))), 257);
    const std::string acc = slurp(dir.file("seg.accumulator.csv"));
    EXPECT_EQ(acc.rfind("intensity,frequency,votes,score,kept\n", 0), 0u);
    EXPECT_EQ(count_lines(acc), 257);
}

TEST(CliSegment, RejectsBadFlags) {
    test::TempDir dir("cli");
    save_image(GrayImage(4, 4, 1), dir.file("a.pgm"));
    EXPECT_NE(run(dir, "segment " + dir.file("a.pgm") + " --kernel 1").status, 0);
    EXPECT_NE(run(dir, "segment " + dir.file("a.pgm") + " --rule nearest").status, 0);
    EXPECT_NE(run(dir, "").status, 0);
}

TEST(CliSegment, ByteIdenticalAcrossRuns) {
    test::TempDir dir("cli");
    save_image(generate_phantom(test::three_material_spec()).image, dir.file("in.png"));
    ASSERT_EQ(run(dir, "segment " + dir.file("in.png") + " --out " + dir.file("a.png")).status, 0);
    ASSERT_EQ(run(dir, "--threads 4 segment " + dir.file("in.png") + " --out " + dir.file("b.png")).status, 0);
    EXPECT_EQ(slurp(dir.file("a.png")), slurp(dir.file("b.png")));
    EXPECT_EQ(slurp(dir.file("a.regions.txt")), slurp(dir.file("b.regions.txt")));
}

TEST(CliHistogram, EstimatedHasFewerBins) {
    test::TempDir dir("cli");
    save_image(generate_phantom(test::three_material_spec()).image, dir.file("in.pgm"));
    const RunResult r = run(dir, "histogram " + dir.file("in.pgm") + " --kernel 3 --out " + dir.file("h"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_LT(nonzero_rows(slurp(dir.file("h.estimated.csv"))), nonzero_rows(slurp(dir.file("h.raw.csv"))));
}

TEST(CliHistogram, ConstantImage) {
    test::TempDir dir("cli");
    save_image(GrayImage(9, 9, 200), dir.file("c.pgm"));
    ASSERT_EQ(run(dir, "histogram " + dir.file("c.pgm")).status, 0);
    const std::string raw = slurp(dir.file("c.raw.csv"));
    EXPECT_EQ(raw, slurp(dir.file("c.estimated.csv")));
    EXPECT_EQ(nonzero_rows(raw), 1);
    EXPECT_NE(raw.find("\n200,81\n"), std::string::npos);
}

TEST(CliHistogram, BadPath) {
    test::TempDir dir("cli");
    EXPECT_NE(run(dir, "histogram " + dir.file("missing.pgm")).status, 0);
}

TEST(CliSynth, DeterministicOutputs) {
    test::TempDir dir("cli");
    write_text(dir.file("p.cfg"), kThreeMaterialCfg);
    ASSERT_EQ(run(dir, "synth " + dir.file("p.cfg") + " --out " + dir.file("a")).status, 0);
    ASSERT_EQ(run(dir, "synth " + dir.file("p.cfg") + " --out " + dir.file("b")).status, 0);
    for (const char* suffix : {".pgm", ".truth.pgm", ".mask.pgm"})
        EXPECT_EQ(slurp(dir.file(std::string("a") + suffix)), slurp(dir.file(std::string("b") + suffix))) << suffix;
    EXPECT_EQ(load_image(dir.file("a.pgm")), generate_phantom(test::three_material_spec()).image);
}

TEST(CliSynth, TruthHasThreeLabels) {
    test::TempDir dir("cli");
    write_text(dir.file("p.cfg"), kThreeMaterialCfg);
    ASSERT_EQ(run(dir, "synth " + dir.file("p.cfg")).status, 0);
    const GrayImage truth = load_image(dir.file("p.truth.pgm"));
    const std::set<int> labels(truth.pixels().begin(), truth.pixels().end());
    EXPECT_EQ(labels, (std::set<int>{0, 1, 2}));
}

TEST(CliSynth, NoMaterialsFails) {
    test::TempDir dir("cli");
    write_text(dir.file("empty.cfg"), "width = 64\nheight = 64\n");
    const RunResult r = run(dir, "synth " + dir.file("empty.cfg"));
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("invalid-spec"), std::string::npos) << r.err;
}

TEST(CliEval, SixRows) {
    test::TempDir dir("cli");
    write_text(dir.file("p.cfg"), kThreeMaterialCfg);
    ASSERT_EQ(run(dir, "synth " + dir.file("p.cfg")).status, 0);
    const RunResult r =
        run(dir, "eval " + dir.file("p.pgm") + " " + dir.file("p.mask.pgm") + " --out " + dir.file("report"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 7);
    EXPECT_EQ(slurp(dir.file("report.csv")), r.out);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir.file("report.json"))).size(), 6u);
}

TEST(CliEval, DimensionMismatch) {
    test::TempDir dir("cli");
    save_image(GrayImage(8, 8, 10), dir.file("img.pgm"));
    save_image(GrayImage(4, 4, {0, 255, 0, 255, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}), dir.file("gt.pgm"));
    const RunResult r = run(dir, "eval " + dir.file("img.pgm") + " " + dir.file("gt.pgm"));
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("dimension-mismatch"), std::string::npos) << r.err;
}

TEST(CliEval, NoiselessRawScoresTwo) {
    test::TempDir dir("cli");
    write_text(dir.file("p.cfg"), "width = 64\nheight = 64\nlayout = stripes\nmaterial = 40 0\nmaterial = 200 0\n");
    ASSERT_EQ(run(dir, "synth " + dir.file("p.cfg")).status, 0);
    const RunResult r = run(dir, "eval " + dir.file("p.pgm") + " " + dir.file("p.mask.pgm") + " --methods raw");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "method,score,params\nraw,2.000000,\n");
}
