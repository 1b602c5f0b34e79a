#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "pupilnet/random.h"
#include "pupilnet/synth.h"

namespace pupilnet {
namespace {

TEST(Synth, DefaultSpecIsValid) {
    EXPECT_NO_THROW(SynthSpec{}.validate());
    SynthSpec bad;
    bad.pupil_radius = {10, 50};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = SynthSpec{};
    bad.aspect = {0.9, 0.8};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Synth, SameSeedSameImage) {
    const SynthSpec spec;
    const auto a = synth_eye(spec, 77);
    const auto b = synth_eye(spec, 77);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.label, b.label);
    EXPECT_NE(synth_eye(spec, 78).image, a.image);
}

TEST(Synth, PixelsAreEightBitLevels) {
    const auto s = synth_eye(SynthSpec{}, 5);
    for (double v : s.image.pixels()) EXPECT_DOUBLE_EQ(v * 255.0, std::round(v * 255.0));
}

TEST(Synth, DarkestPixelLiesInCleanCenteredPupil) {
    SynthSpec spec;
    spec.width = 300;
    spec.height = 300;
    spec.margin = 149;
    spec.noise_sigma = 0.0;
    spec.reflection_count = {0, 0};
    spec.dark_spot_count = {0, 0};
    spec.gradient = {0.0, 0.0};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = synth_eye(spec, seed);
        int bx = 0, by = 0;
        for (int y = 0; y < s.image.height(); ++y)
            for (int x = 0; x < s.image.width(); ++x)
                if (s.image.at(x, y) < s.image.at(bx, by)) {
                    bx = x;
                    by = y;
                }
        EXPECT_LE(std::hypot(bx - s.label.x, by - s.label.y), spec.pupil_radius.hi) << seed;
        EXPECT_NEAR(s.label.x, 149.5, 0.5);
    }
}

TEST(Synth, CentersCoverPlacementRegionUniformly) {
    const SynthSpec spec;
    std::array<int, 16> cells{};
    const double x0 = spec.margin, x1 = spec.width - 1 - spec.margin;
    const double y0 = spec.margin, y1 = spec.height - 1 - spec.margin;
    for (int i = 0; i < 1000; ++i) {
        const auto s = synth_eye(spec, derive_seed(2024, "chi/" + std::to_string(i)));
        const int cx = std::min(3, static_cast<int>(4 * (s.label.x - x0) / (x1 - x0)));
        const int cy = std::min(3, static_cast<int>(4 * (s.label.y - y0) / (y1 - y0)));
        ++cells[cy * 4 + cx];
    }
    double chi2 = 0.0;
    for (int c : cells) chi2 += (c - 62.5) * (c - 62.5) / 62.5;
    // upper 1% point of chi-square with 15 degrees of freedom
    EXPECT_LT(chi2, 30.578);
}

}  // namespace
}  // namespace pupilnet
