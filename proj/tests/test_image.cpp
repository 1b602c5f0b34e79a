#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pupilnet/image.h"

namespace pupilnet {
namespace {

GrayImage ramp(int w, int h) {
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) px[y * w + x] = static_cast<double>(x + 2 * y) / (w + 2 * h);
    return GrayImage(w, h, std::move(px));
}

TEST(GrayImage, RejectsOutOfRangePixels) {
    EXPECT_THROW(GrayImage(2, 1, std::vector<double>{0.5, 1.5}), std::invalid_argument);
    EXPECT_THROW(GrayImage(2, 2, std::vector<double>{0.5}), std::invalid_argument);
}

TEST(Pgm, ReadsBinaryWithComments) {
    std::string data = "P5\n# made by hand\n3 2\n255\n";
    data += std::string{'\x00', '\x7f', '\xff', '\x10', '\x20', '\x30'};
    std::istringstream in(data);
    const GrayImage img = read_pgm(in);
    ASSERT_EQ(img.width(), 3);
    ASSERT_EQ(img.height(), 2);
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 127.0 / 255.0);
    EXPECT_DOUBLE_EQ(img.at(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(img.at(2, 1), 48.0 / 255.0);
}

TEST(Pgm, RejectsAsciiVariant) {
    std::istringstream in("P2\n2 1\n255\n0 255\n");
    EXPECT_THROW(read_pgm(in), ImageFormatError);
}

TEST(Pgm, RejectsTruncatedRaster) {
    std::istringstream in(std::string("P5\n4 4\n255\n") + "abc");
    EXPECT_THROW(read_pgm(in), ImageFormatError);
}

TEST(Pgm, RoundTripsQuantizedImage) {
    std::vector<double> px;
    for (int i = 0; i < 12; ++i) px.push_back((i * 20) / 255.0);
    const GrayImage img(4, 3, px);
    std::stringstream buf;
    write_pgm(img, buf);
    EXPECT_EQ(read_pgm(buf), img);
}

TEST(Pgm, ByteQuantizationRoundsHalfUp) {
    EXPECT_EQ(to_byte(0.0), 0);
    EXPECT_EQ(to_byte(1.0), 255);
    EXPECT_EQ(to_byte(0.5 / 255.0), 1);
    EXPECT_EQ(to_byte(0.49 / 255.0), 0);
}

TEST(Resize, IdentityScaleIsExact) {
    const GrayImage img = ramp(17, 9);
    EXPECT_EQ(bicubic_resize(img, {1, 1}), img);
}

TEST(Resize, ConstantImageStaysConstant) {
    const GrayImage img(40, 30, 0.37);
    for (ScaleFactor f : {ScaleFactor{1, 4}, ScaleFactor{3, 1}, ScaleFactor{2, 3}}) {
        const GrayImage out = bicubic_resize(img, f);
        for (double v : out.pixels()) EXPECT_NEAR(v, 0.37, 1e-12);
    }
}

TEST(Resize, QuarterOfEyeFrameIs96By72) {
    const GrayImage out = bicubic_resize(GrayImage(384, 288, 0.5), {1, 4});
    EXPECT_EQ(out.width(), 96);
    EXPECT_EQ(out.height(), 72);
}

TEST(Resize, LinearRampMapsToPixelCenters) {
    // Catmull-Rom reproduces linear functions; upscaling samples at (u+0.5)/s-0.5
    std::vector<double> px(16);
    for (int x = 0; x < 16; ++x) px[x] = x / 20.0;
    const GrayImage img(16, 1, px);
    const GrayImage up = bicubic_resize(img, {2, 1});
    for (int u = 4; u < 26; ++u) EXPECT_NEAR(up.at(u, 0), ((u + 0.5) / 2.0 - 0.5) / 20.0, 1e-12);
}

TEST(Resize, SmoothImageSurvivesDownUpRoundTrip) {
    std::vector<double> px(384 * 288);
    for (int y = 0; y < 288; ++y)
        for (int x = 0; x < 384; ++x)
            px[y * 384 + x] = 0.5 + 0.3 * std::sin(x / 25.0) * std::cos(y / 31.0);
    const GrayImage img(384, 288, px);
    const GrayImage back = bicubic_resize(bicubic_resize(img, {1, 4}), {4, 1});
    ASSERT_EQ(back.width(), 384);
    double mae = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) mae += std::abs(back.pixels()[i] - px[i]);
    EXPECT_LT(mae / px.size(), 0.02);
}

TEST(Patch, CenterConvention) {
    const PatchSpec even = PatchSpec::from_top_left(3, 4, 24);
    EXPECT_DOUBLE_EQ(even.center_x, 14.5);
    EXPECT_DOUBLE_EQ(even.center_y, 15.5);
    EXPECT_EQ(even.left(), 3);
    const PatchSpec odd = PatchSpec::from_top_left(0, 0, 89);
    EXPECT_DOUBLE_EQ(odd.center_x, 44.0);
    EXPECT_THROW((PatchSpec{10.0, 10.0, 24}.left()), std::invalid_argument);
}

TEST(Patch, ExtractsRowMajorWindow) {
    const GrayImage img = ramp(10, 8);
    const auto patch = extract_patch(img, PatchSpec::from_top_left(2, 3, 4));
    ASSERT_EQ(patch.size(), 16u);
    EXPECT_DOUBLE_EQ(patch[0], img.at(2, 3));
    EXPECT_DOUBLE_EQ(patch[5], img.at(3, 4));
    EXPECT_DOUBLE_EQ(patch[15], img.at(5, 6));
}

TEST(Patch, OutOfBoundsThrows) {
    const GrayImage img(10, 8, 0.0);
    EXPECT_THROW(extract_patch(img, PatchSpec::from_top_left(7, 0, 4)), PatchOutOfBounds);
    EXPECT_THROW(extract_patch(img, PatchSpec::from_top_left(-1, 0, 4)), PatchOutOfBounds);
    EXPECT_NO_THROW(extract_patch(img, PatchSpec::from_top_left(6, 4, 4)));
}

}  // namespace
}  // namespace pupilnet
