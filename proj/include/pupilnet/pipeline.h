#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pupilnet/cnn.h"
#include "pupilnet/geometry.h"
#include "pupilnet/image.h"

namespace pupilnet {

enum class DetectMode { TwoStage, SingleStage, CoarseOnly, CoarseRay };

std::string mode_name(DetectMode mode);
DetectMode parse_mode(std::string_view name);

class PipelineError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
    DetectMode mode = DetectMode::TwoStage;
    int downscale_factor = 4;
    int refine_radius = 10;
    int ray_range = 30;
    /// When non-empty, the models must match these presets exactly.
    std::string coarse_preset = "C_K8P8";
    std::string fine_preset = "F_K8P8";
    std::string single_preset = "S_K8P8";
    std::size_t workers = 1;

    void validate() const;
};

/// Models required per mode: coarse for two-stage / coarse-only / coarse+ray,
/// fine for two-stage, single for single-stage.
struct PipelineModels {
    std::optional<CnnModel> coarse;
    std::optional<CnnModel> fine;
    std::optional<CnnModel> single;
};

/// Best window center of a stage and its rating.
struct StageEstimate {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
    std::size_t evaluations = 0;
};

struct DetectionResult {
    double coarse_x = 0.0;  // downscaled-image coordinates
    double coarse_y = 0.0;
    double coarse_confidence = 0.0;
    double fine_x = 0.0;  // original-image coordinates
    double fine_y = 0.0;
    double fine_confidence = 0.0;

    Point fine() const { return {fine_x, fine_y}; }
};

/// Rates every window at stride 1 and returns the best window's center.
StageEstimate coarse_detect(const CnnModel& model, const GrayImage& downscaled, std::size_t workers = 1);

/// Block-center mapping from downscaled to original coordinates.
Point map_coarse_to_original(Point coarse, int factor);

/// Rates the (2r+1)^2 windows centered on the rounded, border-clamped anchor
/// shifted by [-r, r] in each axis; returns the best window's center.
StageEstimate fine_detect(const CnnModel& model, const GrayImage& image, Point anchor, int radius,
                          std::size_t workers = 1);

/// Anchor actually used by fine_detect: rounded, then clamped so every
/// shifted window fits (as far as the image allows).
Point clamp_fine_anchor(const GrayImage& image, int window, Point anchor, int radius);

/// Edge-ray refinement: from the rounded anchor, 8 rays at 45 degree steps
/// (each at most max_range px long, clipped at the border) locate the
/// strongest adjacent-pixel step; the midpoints of the 4 opposite ray pairs
/// are formed and the mean of the two closest midpoints is returned.
Point refine_ray(const GrayImage& image, Point anchor, int max_range = 30);

GrayImage downscale(const GrayImage& image, int factor);

DetectionResult detect(const PipelineConfig& config, const PipelineModels& models, const GrayImage& image);

}  // namespace pupilnet
