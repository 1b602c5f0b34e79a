#include "pupilnet/pipeline.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "pupilnet/presets.h"
#include "pupilnet/window_scorer.h"

namespace pupilnet {

std::string mode_name(DetectMode mode) {
    switch (mode) {
        case DetectMode::TwoStage: return "two-stage";
        case DetectMode::SingleStage: return "single-stage";
        case DetectMode::CoarseOnly: return "coarse-only";
        case DetectMode::CoarseRay: return "coarse+ray";
    }
    return "unknown";
}

DetectMode parse_mode(std::string_view name) {
    for (DetectMode m : {DetectMode::TwoStage, DetectMode::SingleStage, DetectMode::CoarseOnly, DetectMode::CoarseRay})
        if (mode_name(m) == name) return m;
    throw PipelineError("unknown mode '" + std::string(name) +
                        "' (expected two-stage, single-stage, coarse-only or coarse+ray)");
}

void PipelineConfig::validate() const {
    if (downscale_factor < 1) throw PipelineError("downscale factor must be >= 1");
    if (refine_radius < 0) throw PipelineError("refine radius must be >= 0");
    if (ray_range < 1) throw PipelineError("ray range must be >= 1");
}

StageEstimate coarse_detect(const CnnModel& model, const GrayImage& downscaled, std::size_t workers) {
    const int s = model.config.input_size;
    if (downscaled.width() < s || downscaled.height() < s) {
        std::ostringstream msg;
        msg << downscaled.width() << "x" << downscaled.height() << " image is smaller than the " << s << "x" << s
            << " window";
        throw PipelineError(msg.str());
    }
    const WindowScorer scorer(model, downscaled);
    const WindowHit hit = best_window(scorer, 0, downscaled.width() - s, 0, downscaled.height() - s, workers);
    return {hit.left + center_offset(s), hit.top + center_offset(s), hit.rating, hit.evaluations};
}

Point map_coarse_to_original(Point coarse, int factor) {
    return {to_original(coarse.x, factor), to_original(coarse.y, factor)};
}

namespace {

// Integer window-center range [lo, hi] keeping a window of `size` inside `extent`.
std::pair<int, int> center_limits(int extent, int size) {
    const int half = size / 2;  // odd sizes: exact; even sizes use the lower-left center pixel
    return {half, extent - size + half};
}

}  // namespace

Point clamp_fine_anchor(const GrayImage& image, int window, Point anchor, int radius) {
    const auto clamp_axis = [&](double v, int extent) {
        const auto [lo, hi] = center_limits(extent, window);
        const int rounded = round_half_up(v);
        // shrink the clamping margin if the image cannot hold the full shift grid
        const int lo_r = lo + radius;
        const int hi_r = hi - radius;
        if (lo_r <= hi_r) return std::clamp(rounded, lo_r, hi_r);
        return std::clamp(rounded, lo, hi);
    };
    return {static_cast<double>(clamp_axis(anchor.x, image.width())),
            static_cast<double>(clamp_axis(anchor.y, image.height()))};
}

StageEstimate fine_detect(const CnnModel& model, const GrayImage& image, Point anchor, int radius,
                          std::size_t workers) {
    const int s = model.config.input_size;
    if (radius < 0) throw PipelineError("refine radius must be >= 0");
    if (image.width() < s || image.height() < s) {
        std::ostringstream msg;
        msg << image.width() << "x" << image.height() << " image is smaller than the " << s << "x" << s
            << " fine window";
        throw PipelineError(msg.str());
    }
    const Point c = clamp_fine_anchor(image, s, anchor, radius);
    const int half = s / 2;
    const int base_left = static_cast<int>(c.x) - half;
    const int base_top = static_cast<int>(c.y) - half;
    const int left_min = std::max(0, base_left - radius);
    const int left_max = std::min(image.width() - s, base_left + radius);
    const int top_min = std::max(0, base_top - radius);
    const int top_max = std::min(image.height() - s, base_top + radius);

    const WindowScorer scorer(model, image,
                              {left_min, top_min, left_max - left_min + s, top_max - top_min + s});
    const WindowHit hit = best_window(scorer, left_min, left_max, top_min, top_max, workers);
    return {hit.left + center_offset(s), hit.top + center_offset(s), hit.rating, hit.evaluations};
}

Point refine_ray(const GrayImage& image, Point anchor, int max_range) {
    const int ax = round_half_up(anchor.x);
    const int ay = round_half_up(anchor.y);
    if (ax < 0 || ay < 0 || ax >= image.width() || ay >= image.height())
        throw PipelineError("ray anchor outside the image");
    if (max_range < 1) throw PipelineError("ray range must be >= 1");

    constexpr std::array<std::array<int, 2>, 8> dirs = {
        {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
    std::array<Point, 8> edges{};
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const int dx = dirs[d][0];
        const int dy = dirs[d][1];
        const double step_len = std::hypot(dx, dy);
        double best = -1.0;
        double best_pos = 0.0;  // in steps from the anchor
        for (int j = 0;; ++j) {
            const int x0 = ax + j * dx, y0 = ay + j * dy;
            const int x1 = x0 + dx, y1 = y0 + dy;
            if ((j + 1) * step_len > max_range + 1e-9) break;
            if (x1 < 0 || y1 < 0 || x1 >= image.width() || y1 >= image.height()) break;
            const double diff = std::abs(image.at(x1, y1) - image.at(x0, y0));
            if (diff > best) {
                best = diff;
                best_pos = j + 0.5;
            }
        }
        edges[d] = {ax + best_pos * dx, ay + best_pos * dy};
    }

    std::array<Point, 4> mids{};
    for (std::size_t k = 0; k < 4; ++k)
        mids[k] = {(edges[k].x + edges[k + 4].x) / 2.0, (edges[k].y + edges[k + 4].y) / 2.0};

    double closest = std::numeric_limits<double>::infinity();
    Point result{static_cast<double>(ax), static_cast<double>(ay)};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double d = distance(mids[i], mids[j]);
            if (d < closest) {
                closest = d;
                result = {(mids[i].x + mids[j].x) / 2.0, (mids[i].y + mids[j].y) / 2.0};
            }
        }
    return result;
}

GrayImage downscale(const GrayImage& image, int factor) {
    if (factor < 1) throw PipelineError("downscale factor must be >= 1");
    if (factor == 1) return image;
    return bicubic_resize(image, {1, factor});
}

namespace {

const CnnModel& require(const std::optional<CnnModel>& model, const std::string& preset, const char* role,
                        DetectMode mode) {
    if (!model)
        throw PipelineError(std::string("mode ") + mode_name(mode) + " needs a " + role + " model");
    if (!preset.empty() && !(model->config == pupilnet::preset(preset)))
        throw PipelineError(std::string(role) + " model does not match preset " + preset);
    return *model;
}

}  // namespace

DetectionResult detect(const PipelineConfig& config, const PipelineModels& models, const GrayImage& image) {
    config.validate();
    const int factor = config.downscale_factor;
    const CnnModel& first = config.mode == DetectMode::SingleStage
                                ? require(models.single, config.single_preset, "single", config.mode)
                                : require(models.coarse, config.coarse_preset, "coarse", config.mode);
    const CnnModel* fine = config.mode == DetectMode::TwoStage
                               ? &require(models.fine, config.fine_preset, "fine", config.mode)
                               : nullptr;

    const GrayImage small = downscale(image, factor);
    const StageEstimate coarse = coarse_detect(first, small, config.workers);
    const Point mapped = map_coarse_to_original({coarse.x, coarse.y}, factor);

    DetectionResult r;
    r.coarse_x = coarse.x;
    r.coarse_y = coarse.y;
    r.coarse_confidence = coarse.confidence;
    r.fine_x = std::clamp(mapped.x, 0.0, image.width() - 1.0);
    r.fine_y = std::clamp(mapped.y, 0.0, image.height() - 1.0);
    r.fine_confidence = coarse.confidence;

    if (config.mode == DetectMode::TwoStage) {
        const StageEstimate refined = fine_detect(*fine, image, mapped, config.refine_radius, config.workers);
        r.fine_x = refined.x;
        r.fine_y = refined.y;
        r.fine_confidence = refined.confidence;
    } else if (config.mode == DetectMode::CoarseRay) {
        const Point p = refine_ray(image, r.fine(), config.ray_range);
        r.fine_x = p.x;
        r.fine_y = p.y;
    }
    return r;
}

}  // namespace pupilnet
