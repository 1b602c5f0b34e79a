#pragma once

#include <cstdint>
#include <utility>

#include "pupilnet/datagen.h"
#include "pupilnet/image.h"

namespace pupilnet {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct IntRange {
    int lo = 0;
    int hi = 0;
};

/// Parameters of the synthetic eye renderer. Every range is sampled
/// uniformly per image. Defaults cover the four challenge classes seen in
/// head-mounted recordings: reflections over the pupil, a pupil in a dark
/// (shadowed) area, and dark physiological spots on the iris.
struct SynthSpec {
    int width = 384;
    int height = 288;
    /// Pupil centers are uniform in [margin, width-1-margin] x [margin, height-1-margin].
    int margin = 60;

    Range pupil_radius{16.0, 24.0};  // semi-major axis, px
    Range iris_radius{48.0, 66.0};
    Range aspect{0.7, 1.0};         // minor / major axis

    Range pupil_intensity{0.02, 0.08};
    Range iris_intensity{0.45, 0.60};
    Range background_intensity{0.60, 0.85};

    IntRange reflection_count{0, 2};
    Range reflection_intensity{0.80, 1.00};
    Range reflection_radius{1.0, 2.5};  // Gaussian sigma, px

    /// Strength of a linear multiplicative shadow across the frame.
    Range gradient{0.0, 0.4};

    /// Dark iris spots, sized and shaded like small pupils.
    IntRange dark_spot_count{0, 1};
    Range dark_spot_radius{3.0, 6.0};

    double noise_sigma = 0.02;
    Range blur_sigma{0.0, 1.5};

    /// Throws std::invalid_argument on empty/negative ranges or
    /// pupil_radius.hi >= iris_radius.lo.
    void validate() const;
};

struct SynthImage {
    GrayImage image;
    PupilLabel label;  // exact rendered pupil center; image_id left empty
};

/// Renders one eye image. Pixels are quantized to multiples of 1/255 so the
/// image survives a PGM round trip unchanged. Deterministic in `seed`.
SynthImage synth_eye(const SynthSpec& spec, std::uint64_t seed);

}  // namespace pupilnet
