#pragma once

#include <cstddef>
#include <vector>

#include "pupilnet/cnn.h"
#include "pupilnet/image.h"

namespace pupilnet {

/// Rates many overlapping windows of one image with a shared convolution.
///
/// The convolution layer is translation-equivariant, so the activation maps of
/// every window inside `region` are slices of one map computed over the whole
/// region. Per-window work is then pooling and the dense head only. Ratings
/// are bit-identical to forward() on the extracted patch.
class WindowScorer {
public:
    struct Region {
        int left = 0;
        int top = 0;
        int width = 0;
        int height = 0;
    };

    /// `model` must outlive the scorer.
    WindowScorer(const CnnModel& model, const GrayImage& image, Region region);

    /// Whole-image region.
    WindowScorer(const CnnModel& model, const GrayImage& image);

    int window_size() const { return model_.config.input_size; }

    /// Output logit of the window with the given image top-left. The window
    /// must lie inside the region.
    double logit(int left, int top) const;
    double rating(int left, int top) const;

private:
    const CnnModel& model_;
    Region region_;
    int map_width_ = 0;
    int map_height_ = 0;
    std::vector<double> maps_;  // num_filters x map_height x map_width, post-logistic
};

/// Best window of a sweep and how many windows were rated.
struct WindowHit {
    int left = 0;
    int top = 0;
    double logit = 0.0;
    double rating = 0.0;
    std::size_t evaluations = 0;
};

/// Rates every window with top-left in [left_min, left_max] x [top_min, top_max]
/// and returns the highest one; equal scores go to the smallest row-major
/// top-left. Rows are split across `workers` threads; the result does not
/// depend on the worker count.
WindowHit best_window(const WindowScorer& scorer, int left_min, int left_max, int top_min, int top_max,
                      std::size_t workers = 1);

}  // namespace pupilnet
