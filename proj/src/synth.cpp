#include "pupilnet/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pupilnet/random.h"

namespace pupilnet {

void SynthSpec::validate() const {
    const auto check = [](Range r, const char* name, double floor) {
        if (!(r.lo <= r.hi) || r.lo < floor)
            throw std::invalid_argument(std::string("SynthSpec: bad range for ") + name);
    };
    const auto check_int = [](IntRange r, const char* name) {
        if (r.lo > r.hi || r.lo < 0) throw std::invalid_argument(std::string("SynthSpec: bad range for ") + name);
    };
    if (width < 1 || height < 1) throw std::invalid_argument("SynthSpec: empty image");
    if (margin < 0 || 2 * margin >= width || 2 * margin >= height)
        throw std::invalid_argument("SynthSpec: margin leaves no placement region");
    check(pupil_radius, "pupil_radius", 0.5);
    check(iris_radius, "iris_radius", 0.5);
    check(aspect, "aspect", 0.05);
    if (aspect.hi > 1.0) throw std::invalid_argument("SynthSpec: aspect must be <= 1");
    check(pupil_intensity, "pupil_intensity", 0.0);
    check(iris_intensity, "iris_intensity", 0.0);
    check(background_intensity, "background_intensity", 0.0);
    check(reflection_intensity, "reflection_intensity", 0.0);
    check(reflection_radius, "reflection_radius", 0.1);
    check(gradient, "gradient", 0.0);
    check(dark_spot_radius, "dark_spot_radius", 0.5);
    check(blur_sigma, "blur_sigma", 0.0);
    check_int(reflection_count, "reflection_count");
    check_int(dark_spot_count, "dark_spot_count");
    for (Range r : {pupil_intensity, iris_intensity, background_intensity, reflection_intensity})
        if (r.hi > 1.0) throw std::invalid_argument("SynthSpec: intensities must be <= 1");
    if (gradient.hi >= 1.0) throw std::invalid_argument("SynthSpec: gradient must be < 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("SynthSpec: negative noise");
    if (pupil_radius.hi >= iris_radius.lo) throw std::invalid_argument("SynthSpec: pupil must be smaller than iris");
}

namespace {

constexpr int kSuper = 4;  // supersampling per axis for anti-aliased edges

// Fraction of pixel (px, py) covered by the region `inside(x, y)`.
template <typename Inside>
double coverage(int px, int py, const Inside& inside) {
    int hits = 0;
    for (int sy = 0; sy < kSuper; ++sy)
        for (int sx = 0; sx < kSuper; ++sx) {
            const double x = px - 0.5 + (sx + 0.5) / kSuper;
            const double y = py - 0.5 + (sy + 0.5) / kSuper;
            hits += inside(x, y) ? 1 : 0;
        }
    return static_cast<double>(hits) / (kSuper * kSuper);
}

void gaussian_blur(std::vector<double>& img, int width, int height, double sigma) {
    if (sigma <= 0.0) return;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[static_cast<std::size_t>(i + radius)];
    }
    for (double& k : kernel) k /= sum;

    std::vector<double> tmp(img.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       img[static_cast<std::size_t>(y) * width + std::clamp(x + i, 0, width - 1)];
            tmp[static_cast<std::size_t>(y) * width + x] = acc;
        }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i + radius)] *
                       tmp[static_cast<std::size_t>(std::clamp(y + i, 0, height - 1)) * width + x];
            img[static_cast<std::size_t>(y) * width + x] = acc;
        }
}

}  // namespace

SynthImage synth_eye(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const auto draw = [&rng](Range r) { return rng.uniform(r.lo, r.hi); };
    const int w = spec.width;
    const int h = spec.height;

    // geometry
    const double cx = rng.uniform(spec.margin, w - 1 - spec.margin);
    const double cy = rng.uniform(spec.margin, h - 1 - spec.margin);
    const double major = draw(spec.pupil_radius);
    const double minor = major * draw(spec.aspect);
    const double tilt = rng.uniform(0.0, std::numbers::pi);
    const double iris_r = draw(spec.iris_radius);
    // the iris is not necessarily concentric with the pupil
    const double iris_dx = rng.uniform(-0.15, 0.15) * iris_r;
    const double iris_dy = rng.uniform(-0.15, 0.15) * iris_r;

    const double pupil_v = draw(spec.pupil_intensity);
    const double iris_v = draw(spec.iris_intensity);
    const double back_v = draw(spec.background_intensity);

    const double cos_t = std::cos(tilt);
    const double sin_t = std::sin(tilt);
    const auto in_pupil = [&](double x, double y) {
        const double u = (x - cx) * cos_t + (y - cy) * sin_t;
        const double v = -(x - cx) * sin_t + (y - cy) * cos_t;
        return (u * u) / (major * major) + (v * v) / (minor * minor) <= 1.0;
    };
    const double ix = cx + iris_dx;
    const double iy = cy + iris_dy;
    const auto in_iris = [&](double x, double y) { return std::hypot(x - ix, y - iy) <= iris_r; };

    struct Spot {
        double x, y, r, v;
    };
    std::vector<Spot> spots(static_cast<std::size_t>(rng.uniform_int(spec.dark_spot_count.lo, spec.dark_spot_count.hi)));
    for (auto& s : spots) {
        // somewhere on the iris ring, outside the pupil
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double dist = rng.uniform(major + 0.5 * (iris_r - major), iris_r * 0.95);
        s = {ix + dist * std::cos(angle), iy + dist * std::sin(angle), draw(spec.dark_spot_radius),
             draw(spec.pupil_intensity)};
    }

    std::vector<double> img(static_cast<std::size_t>(w) * h);
    // background with a gentle vertical falloff (lids/skin)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dy = (y - cy) / h;
            double v = back_v * (1.0 - 0.3 * dy * dy);
            const double iris_cov = std::hypot(x - ix, y - iy) > iris_r + 1.5 ? 0.0 : coverage(x, y, in_iris);
            v += iris_cov * (iris_v - v);
            for (const Spot& s : spots) {
                const double d = std::hypot(x - s.x, y - s.y);
                if (d <= s.r + 1.5)
                    v += coverage(x, y, [&](double px, double py) { return std::hypot(px - s.x, py - s.y) <= s.r; }) *
                         (s.v - v);
            }
            const double pupil_cov = std::hypot(x - cx, y - cy) > major + 1.5 ? 0.0 : coverage(x, y, in_pupil);
            v += pupil_cov * (pupil_v - v);
            img[static_cast<std::size_t>(y) * w + x] = v;
        }

    // specular reflections near the pupil
    const int reflections = rng.uniform_int(spec.reflection_count.lo, spec.reflection_count.hi);
    for (int i = 0; i < reflections; ++i) {
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double dist = rng.uniform(0.0, 1.2 * major);
        const double rx = cx + dist * std::cos(angle);
        const double ry = cy + dist * std::sin(angle);
        const double sigma = draw(spec.reflection_radius);
        const double peak = draw(spec.reflection_intensity);
        const int reach = static_cast<int>(std::ceil(4.0 * sigma));
        for (int y = std::max(0, static_cast<int>(ry) - reach); y <= std::min(h - 1, static_cast<int>(ry) + reach); ++y)
            for (int x = std::max(0, static_cast<int>(rx) - reach); x <= std::min(w - 1, static_cast<int>(rx) + reach);
                 ++x) {
                const double d2 = (x - rx) * (x - rx) + (y - ry) * (y - ry);
                double& v = img[static_cast<std::size_t>(y) * w + x];
                v += (peak - v) * std::exp(-0.5 * d2 / (sigma * sigma));
            }
    }

    // illumination: linear multiplicative shadow in a random direction
    const double strength = draw(spec.gradient);
    const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double gx = std::cos(dir);
    const double gy = std::sin(dir);
    const double half_extent = 0.5 * (std::abs(gx) * (w - 1) + std::abs(gy) * (h - 1));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double t = 0.5 + ((x - 0.5 * (w - 1)) * gx + (y - 0.5 * (h - 1)) * gy) / (2.0 * half_extent + 1e-12);
            img[static_cast<std::size_t>(y) * w + x] *= 1.0 - strength * t;
        }

    gaussian_blur(img, w, h, draw(spec.blur_sigma));

    for (double& v : img) {
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
        v = to_byte(v) / 255.0;
    }

    return {GrayImage(w, h, std::move(img)), PupilLabel{"", cx, cy}};
}

}  // namespace pupilnet
