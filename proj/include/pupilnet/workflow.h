#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pupilnet/cnn.h"
#include "pupilnet/datagen.h"
#include "pupilnet/eval.h"
#include "pupilnet/pipeline.h"
#include "pupilnet/presets.h"
#include "pupilnet/synth.h"

namespace pupilnet {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// `.pgm` files of a directory in lexicographic filename order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& directory);

/// Writes `count` images named eye_<nnnnn>.pgm plus labels.csv into `out_dir`.
/// Image i is rendered from derive_seed(seed, "synth/<i>").
std::vector<PupilLabel> write_synthetic_corpus(const SynthSpec& spec, std::size_t count, std::uint64_t seed,
                                               const std::filesystem::path& out_dir);

struct TrainingSet {
    std::vector<TrainingSample> samples;
    GenerationStats stats;
};

/// Training samples for a stage from labeled images in `image_dir`.
/// coarse/single: gen_coarse_samples on the downscaled image with the preset's
/// window; fine: gen_fine_samples followed by subsample_fine (seeded by
/// derive_seed(seed, "subsample")), cutting only the retained windows.
TrainingSet build_training_set(Stage stage, const CnnConfig& config, const std::filesystem::path& image_dir,
                               std::span<const PupilLabel> labels, int downscale_factor, std::uint64_t seed);

struct DetectionRow {
    std::string image_id;
    DetectionResult result;
};

void write_results_csv(std::span<const DetectionRow> rows, std::ostream& out);
std::vector<DetectionRow> read_results_csv(std::istream& in);

/// Curve of detection results against labels matched by image_id; throws
/// LabelError when a result has no label.
EvalCurve evaluate_results(std::span<const DetectionRow> rows, std::span<const PupilLabel> labels, int t_max);

void write_loss_csv(std::span<const double> loss_history, std::ostream& out);

}  // namespace pupilnet
