#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "pupilnet/datagen.h"
#include "pupilnet/random.h"

namespace pupilnet {
namespace {

std::vector<PupilLabel> parse(const std::string& text) {
    std::istringstream in(text);
    return read_labels(in);
}

TEST(Labels, ParsesWithAndWithoutHeader) {
    const auto a = parse("image_id,x,y\neye_0001.pgm,192.5,144.0\n");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0], (PupilLabel{"eye_0001.pgm", 192.5, 144.0}));
    const auto b = parse("a.pgm,1,2\n\nb.pgm,3.25,4\n");
    ASSERT_EQ(b.size(), 2u);
    EXPECT_DOUBLE_EQ(b[1].x, 3.25);
    EXPECT_TRUE(parse("").empty());
}

TEST(Labels, ReportsLineOfMalformedEntry) {
    try {
        parse("a.pgm,1,2\nb.pgm,zz,4\n");
        FAIL();
    } catch (const LabelError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse("a.pgm,1\n"), LabelError);
    EXPECT_THROW(parse("a.pgm,1,2\na.pgm,3,4\n"), LabelError);
}

TEST(Labels, BoundsCheck) {
    EXPECT_THROW(check_label_bounds({"eye_0002.pgm", 400, 10}, 384, 288), LabelError);
    EXPECT_THROW(check_label_bounds({"e", 10, -0.5}, 384, 288), LabelError);
    EXPECT_NO_THROW(check_label_bounds({"e", 383.9, 0}, 384, 288));
}

TEST(Labels, WriteReadRoundTrip) {
    const std::vector<PupilLabel> labels{{"a.pgm", 0.1, 1.0 / 3.0}, {"b.pgm", 250, 17.125}};
    std::stringstream buf;
    write_labels(labels, buf);
    EXPECT_EQ(read_labels(buf), labels);
}

TEST(Offsets, CoarseSetsAreDisjointAndOnTheirRings) {
    const auto valid = coarse_valid_offsets();
    const auto invalid = coarse_invalid_offsets();
    ASSERT_EQ(valid.size(), 9u);
    ASSERT_EQ(invalid.size(), 32u);
    std::set<std::pair<int, int>> seen;
    for (Offset o : valid) {
        EXPECT_LE(std::max(std::abs(o.dx), std::abs(o.dy)), 1);
        seen.insert({o.dx, o.dy});
    }
    for (Offset o : invalid) {
        const int cheb = std::max(std::abs(o.dx), std::abs(o.dy));
        EXPECT_GE(cheb, 2);
        EXPECT_LE(cheb, 5);
        seen.insert({o.dx, o.dy});
    }
    EXPECT_EQ(seen.size(), 41u);
}

TEST(Offsets, RoundedEuclideanRingCollidesWithValidSet) {
    // why the invalid rings are Chebyshev: at r = 2 the diagonal rounds into the 3x3 block
    const double a = std::numbers::pi / 4;
    const int dx = static_cast<int>(std::lround(2 * std::cos(a)));
    const int dy = static_cast<int>(std::lround(2 * std::sin(a)));
    const auto valid = coarse_valid_offsets();
    EXPECT_NE(std::find(valid.begin(), valid.end(), Offset{dx, dy}), valid.end());
}

TEST(Offsets, FineRing) {
    const auto fine = fine_invalid_offsets();
    ASSERT_EQ(fine.size(), 8u);
    int diagonals = 0;
    for (Offset o : fine) {
        const double d = std::hypot(o.dx, o.dy);
        if (std::abs(o.dx) == 4 && std::abs(o.dy) == 4) {
            EXPECT_NEAR(d, std::sqrt(32.0), 1e-12);
            ++diagonals;
        } else {
            EXPECT_DOUBLE_EQ(d, 5.0);
        }
    }
    EXPECT_EQ(diagonals, 4);
}

TEST(Generation, CoarseCountsForRandomLabels) {
    const GrayImage img(96, 72, 0.5);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const PupilLabel l{"", rng.uniform(0, 95.9), rng.uniform(0, 71.9)};
        const auto s = gen_coarse_samples(img, l);
        ASSERT_EQ(s.size(), 41u);
        EXPECT_EQ(std::count_if(s.begin(), s.end(), [](const auto& t) { return t.target == 1; }), 9);
        for (const auto& t : s) EXPECT_EQ(t.patch.size(), 576u);
    }
}

TEST(Generation, CoarseAnchorSnapsToNearestCenter) {
    const auto offsets = coarse_valid_offsets();
    const auto centre = std::find(offsets.begin(), offsets.end(), Offset{0, 0}) - offsets.begin();
    const auto w = plan_coarse_windows(96, 72, 24, {40.5, 30.5});
    EXPECT_EQ(w[centre].target, 1);
    EXPECT_DOUBLE_EQ(w[centre].left + 11.5, 40.5);
    EXPECT_DOUBLE_EQ(w[centre].top + 11.5, 30.5);
    const auto v = plan_coarse_windows(96, 72, 24, {40.2, 30.9});
    EXPECT_LE(std::abs(v[centre].left + 11.5 - 40.2), 0.5);
    EXPECT_LE(std::abs(v[centre].top + 11.5 - 30.9), 0.5);
}

TEST(Generation, BorderLabelsAreClampedAndCounted) {
    bool clamped = false;
    const auto w = plan_coarse_windows(96, 72, 24, {2.0, 70.0}, &clamped);
    EXPECT_TRUE(clamped);
    for (const auto& s : w) {
        EXPECT_GE(s.left, 0);
        EXPECT_LE(s.top + 24, 72);
    }
    GenerationStats stats;
    gen_coarse_samples(GrayImage(96, 72, 0.1), {"", 2.0, 70.0}, 24, &stats);
    gen_coarse_samples(GrayImage(96, 72, 0.1), {"", 50.0, 30.0}, 24, &stats);
    EXPECT_EQ(stats.clamped, 1u);
}

TEST(Generation, FineWindows) {
    const auto w = plan_fine_windows(384, 288, 89, {192.0, 144.0});
    ASSERT_EQ(w.size(), 9u);
    EXPECT_EQ(w[0].target, 1);
    EXPECT_EQ(w[0].left, 192 - 44);
    EXPECT_EQ(w[0].top, 144 - 44);
    const GrayImage img(384, 288, 0.2);
    const auto s = gen_fine_samples(img, {"", 200.3, 100.7});
    EXPECT_EQ(std::count_if(s.begin(), s.end(), [](const auto& t) { return t.target == 1; }), 1);
    EXPECT_EQ(s.size(), 9u);
}

TEST(Subsample, KeepsHalfValidQuarterInvalid) {
    std::vector<int> targets(100, 1);
    targets.insert(targets.end(), 800, 0);
    const auto keep = subsample_indices(targets, 3);
    const auto valid = std::count_if(keep.begin(), keep.end(), [&](std::size_t i) { return targets[i] == 1; });
    EXPECT_EQ(valid, 50);
    EXPECT_EQ(keep.size() - valid, 200u);
    EXPECT_TRUE(std::is_sorted(keep.begin(), keep.end()));
    EXPECT_EQ(keep, subsample_indices(targets, 3));
    EXPECT_NE(keep, subsample_indices(targets, 4));

    const std::vector<int> one{1, 0, 0, 0, 0, 0, 0, 0, 0};
    const auto small = subsample_indices(one, 1);
    ASSERT_EQ(small.size(), 3u);
    EXPECT_EQ(small[0], 0u);
}

TEST(Split, SizesAndDisjointness) {
    std::vector<PupilLabel> labels;
    for (int i = 0; i < 101; ++i) labels.push_back({"img" + std::to_string(i), 1, 1});
    const auto [train, eval] = split_dataset(labels, 0.5, 9);
    EXPECT_EQ(train.size(), 51u);
    EXPECT_EQ(eval.size(), 50u);
    std::set<std::string> ids;
    for (const auto& l : train) ids.insert(l.image_id);
    for (const auto& l : eval) ids.insert(l.image_id);
    EXPECT_EQ(ids.size(), 101u);
    EXPECT_EQ(split_dataset(labels, 0.5, 9).first, train);

    labels.pop_back();
    EXPECT_EQ(split_dataset(labels, 0.5, 1).first.size(), 50u);
    EXPECT_THROW(split_dataset(labels, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(split_dataset({}, 0.5, 1), std::invalid_argument);
}

}  // namespace
}  // namespace pupilnet
