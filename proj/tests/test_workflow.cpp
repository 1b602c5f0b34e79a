#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pupilnet/model_io.h"
#include "pupilnet/workflow.h"

namespace fs = std::filesystem;

namespace pupilnet {
namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pupilnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args, std::string* out = nullptr) {
        const fs::path log = dir_ / "stdout.txt";
        const std::string cmd = std::string(PUPILNET_CLI) + " " + args + " > " + log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        if (out) *out = slurp(log);
        return status;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
};

TEST_F(CliTest, SynthIsDeterministic) {
    const std::string common = " --count 3 --seed 9 --width 200 --height 160 --margin 70";
    ASSERT_EQ(run("synth --out " + (dir_ / "a").string() + common), 0);
    ASSERT_EQ(run("synth --out " + (dir_ / "b").string() + common), 0);
    for (const char* f : {"eye_00000.pgm", "eye_00002.pgm", "labels.csv"})
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    EXPECT_EQ(load_labels(dir_ / "a" / "labels.csv").size(), 3u);
}

TEST_F(CliTest, SynthZeroImagesWritesHeaderOnly) {
    ASSERT_EQ(run("synth --count 0 --out " + dir_.string()), 0);
    EXPECT_EQ(slurp(dir_ / "labels.csv"), "image_id,x,y\n");
    EXPECT_TRUE(list_images(dir_).empty());
}

TEST_F(CliTest, TrainDetectEvalRoundTrip) {
    const std::string corpus = (dir_ / "c").string();
    ASSERT_EQ(run("synth --count 4 --seed 1 --out " + corpus), 0);
    const std::string model = (dir_ / "coarse.pnet").string();
    ASSERT_EQ(run("train --stage coarse --preset C_K4P8 --labels " + corpus + "/labels.csv --epochs 2 --batch 40"
                  " --model-out " + model), 0);
    EXPECT_EQ(load_model(model).config, preset("C_K4P8"));
    EXPECT_EQ(slurp(model + ".loss.csv").substr(0, 11), "epoch,loss\n");

    std::string out;
    ASSERT_EQ(run("detect --mode coarse-only --coarse-model " + model + " --input " + corpus + " --output " +
                  (dir_ / "r.csv").string()), 0);
    std::ifstream results(dir_ / "r.csv");
    EXPECT_EQ(read_results_csv(results).size(), 4u);
    ASSERT_EQ(run("eval --results " + (dir_ / "r.csv").string() + " --labels " + corpus + "/labels.csv --out " +
                  (dir_ / "curve.csv").string(), &out), 0);
    EXPECT_NE(out.find("rate@5px="), std::string::npos);
    EXPECT_EQ(slurp(dir_ / "curve.csv").substr(0, 15), "threshold,rate\n");
}

TEST_F(CliTest, MismatchedStageAndPresetFails) {
    std::string out;
    EXPECT_NE(run("train --stage fine --preset C_K8P8 --labels x.csv --model-out m.pnet", &out), 0);
    EXPECT_NE(out.find("pupilnet: error:"), std::string::npos);
}

TEST_F(CliTest, InspectReportsFlopsAndRejectsTruncatedModel) {
    const fs::path model = dir_ / "s.pnet";
    save_model(init_model(preset("S_K8P8"), 1), model);
    ASSERT_EQ(run("inspect --model " + model.string() + " --out " + (dir_ / "inspect").string()), 0);
    const std::string flops = slurp(dir_ / "inspect" / "flops.csv");
    EXPECT_NE(flops.find("conv,115200,"), std::string::npos);
    EXPECT_NE(flops.find("total,120008,"), std::string::npos);
    EXPECT_NE(flops.find("image_total,414747648,"), std::string::npos);

    const std::string bytes = slurp(model);
    std::ofstream(dir_ / "cut.pnet", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    std::string out;
    EXPECT_NE(run("inspect --model " + (dir_ / "cut.pnet").string() + " --out " + (dir_ / "x").string(), &out), 0);
    EXPECT_NE(out.find("truncated stream"), std::string::npos);
}

TEST(Results, CsvRoundTrip) {
    DetectionRow row{"eye.pgm", {}};
    row.result.coarse_x = 10.5;
    row.result.fine_x = 0.1;
    row.result.fine_y = 1.0 / 3.0;
    row.result.fine_confidence = 0.75;
    std::stringstream buf;
    const std::vector<DetectionRow> rows{row};
    write_results_csv(rows, buf);
    const auto back = read_results_csv(buf);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].image_id, "eye.pgm");
    EXPECT_EQ(back[0].result.fine_y, 1.0 / 3.0);
    EXPECT_EQ(back[0].result.coarse_x, 10.5);
}

TEST(Results, MissingLabelIsAnError) {
    const std::vector<DetectionRow> rows{{"a.pgm", {}}};
    const std::vector<PupilLabel> labels{{"b.pgm", 1, 1}};
    EXPECT_THROW(evaluate_results(rows, labels, 5), LabelError);
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace pupilnet
