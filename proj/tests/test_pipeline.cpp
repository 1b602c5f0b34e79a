#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"
#include "pupilnet/pipeline.h"
#include "pupilnet/presets.h"
#include "pupilnet/window_scorer.h"

namespace pupilnet {
namespace {

GrayImage noise_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (double& v : px) v = rng.uniform();
    return GrayImage(w, h, std::move(px));
}

GrayImage disc_image(int w, int h, double cx, double cy, double r) {
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) px[y * w + x] = std::hypot(x - cx, y - cy) <= r ? 0.1 : 0.8;
    return GrayImage(w, h, std::move(px));
}

TEST(Modes, NamesRoundTrip) {
    for (DetectMode m : {DetectMode::TwoStage, DetectMode::SingleStage, DetectMode::CoarseOnly, DetectMode::CoarseRay})
        EXPECT_EQ(parse_mode(mode_name(m)), m);
    EXPECT_EQ(parse_mode("coarse+ray"), DetectMode::CoarseRay);
    EXPECT_THROW(parse_mode("three-stage"), PipelineError);
}

TEST(WindowScorer, MatchesForwardOnExtractedPatches) {
    const CnnModel m = oracle::random_model(preset("C_K8P8"), 3);
    const GrayImage img = noise_image(40, 33, 1);
    const WindowScorer scorer(m, img);
    for (int top = 0; top + 24 <= 33; top += 3)
        for (int left = 0; left + 24 <= 40; left += 4) {
            const auto patch = extract_patch(img, PatchSpec::from_top_left(left, top, 24));
            EXPECT_EQ(scorer.rating(left, top), forward(m, patch));
        }
}

TEST(WindowScorer, RegionMatchesWholeImage) {
    const CnnModel m = oracle::random_model(preset("C_K4P8"), 4);
    const GrayImage img = noise_image(50, 40, 2);
    const WindowScorer whole(m, img);
    const WindowScorer part(m, img, {10, 5, 30, 30});
    EXPECT_EQ(part.logit(12, 7), whole.logit(12, 7));
    EXPECT_EQ(part.logit(16, 11), whole.logit(16, 11));
}

TEST(Coarse, EvaluatesEveryWindowOfA96By72Image) {
    const GrayImage img = noise_image(96, 72, 3);
    EXPECT_EQ(coarse_detect(init_model(preset("C_K8P8"), 1), img).evaluations, 3577u);
    EXPECT_EQ(coarse_detect(init_model(preset("S_K8P8"), 1), img).evaluations, 3456u);
}

TEST(Coarse, SingleWindowImageReturnsItsCenter) {
    const StageEstimate e = coarse_detect(init_model(preset("C_K8P8"), 1), GrayImage(24, 24, 0.4));
    EXPECT_DOUBLE_EQ(e.x, 11.5);
    EXPECT_DOUBLE_EQ(e.y, 11.5);
    EXPECT_EQ(e.evaluations, 1u);
}

TEST(Coarse, ConstantImageTieGoesToFirstWindow) {
    const StageEstimate e = coarse_detect(init_model(preset("C_K8P8"), 1), GrayImage(40, 30, 0.4));
    EXPECT_DOUBLE_EQ(e.x, 11.5);
    EXPECT_DOUBLE_EQ(e.y, 11.5);
}

TEST(Coarse, MapsBlockCenters) {
    const Point p = map_coarse_to_original({10, 20}, 4);
    EXPECT_DOUBLE_EQ(p.x, 41.5);
    EXPECT_DOUBLE_EQ(p.y, 81.5);
}

TEST(Coarse, ParallelSweepEqualsSequential) {
    const CnnModel m = oracle::random_model(preset("C_K8P8"), 5);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const GrayImage img = noise_image(96, 72, 100 + s);
        const WindowScorer scorer(m, img);
        const WindowHit a = best_window(scorer, 0, 72, 0, 48, 1);
        const WindowHit b = best_window(scorer, 0, 72, 0, 48, 4);
        EXPECT_EQ(a.left, b.left);
        EXPECT_EQ(a.top, b.top);
        EXPECT_EQ(a.logit, b.logit);
    }
}

TEST(Fine, RatesTheShiftGrid) {
    const GrayImage img = noise_image(384, 288, 4);
    const CnnModel m = init_model(preset("F_K8P8"), 1);
    const StageEstimate e = fine_detect(m, img, {192.3, 140.6}, 10);
    EXPECT_EQ(e.evaluations, 441u);
    EXPECT_LE(std::abs(e.x - 192), 10);
    EXPECT_LE(std::abs(e.y - 141), 10);
}

TEST(Fine, AnchorIsRoundedAndClamped) {
    const GrayImage img(384, 288, 0.5);
    EXPECT_EQ(clamp_fine_anchor(img, 89, {100.5, 100.4}, 10), (Point{101, 100}));
    EXPECT_EQ(clamp_fine_anchor(img, 89, {2, 287}, 10), (Point{54, 233}));
    const StageEstimate e = fine_detect(init_model(preset("F_K8P8"), 1), img, {0, 0}, 10);
    EXPECT_EQ(e.evaluations, 441u);
}

TEST(Ray, FindsDiscCenter) {
    const GrayImage img = disc_image(200, 150, 97.0, 71.0, 15.0);
    EXPECT_LE(distance(refine_ray(img, {97, 71}, 30), {97, 71}), 0.5);
    for (Point start : {Point{98, 70}, Point{102, 68}, Point{90, 75}}) {
        const Point p = refine_ray(img, start, 30);
        EXPECT_LT(distance(p, {97, 71}), distance(start, {97, 71})) << start.x << "," << start.y;
    }
}

TEST(Ray, ConstantImageKeepsAnchor) {
    const Point p = refine_ray(GrayImage(100, 100, 0.5), {40.2, 60.7}, 30);
    EXPECT_DOUBLE_EQ(p.x, 40.0);
    EXPECT_DOUBLE_EQ(p.y, 61.0);
}

TEST(Detect, MissingOrMismatchedModelsAreRejected) {
    PipelineConfig cfg;
    PipelineModels models;
    models.coarse = init_model(preset("C_K8P8"), 1);
    const GrayImage img(384, 288, 0.5);
    EXPECT_THROW(detect(cfg, models, img), PipelineError);
    models.fine = init_model(preset("C_K8P8"), 1);
    EXPECT_THROW(detect(cfg, models, img), PipelineError);
    cfg.mode = DetectMode::CoarseOnly;
    EXPECT_NO_THROW(detect(cfg, models, img));
}

TEST(Detect, CoarseOnlyReportsMappedCenter) {
    PipelineConfig cfg;
    cfg.mode = DetectMode::CoarseOnly;
    PipelineModels models;
    models.coarse = oracle::random_model(preset("C_K8P8"), 2);
    const GrayImage img = noise_image(384, 288, 8);
    const DetectionResult r = detect(cfg, models, img);
    const Point mapped = map_coarse_to_original({r.coarse_x, r.coarse_y}, 4);
    EXPECT_DOUBLE_EQ(r.fine_x, mapped.x);
    EXPECT_DOUBLE_EQ(r.fine_y, mapped.y);
    EXPECT_GT(r.coarse_confidence, 0.0);
    EXPECT_LT(r.coarse_confidence, 1.0);
}

}  // namespace
}  // namespace pupilnet
