#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pupilnet/cnn.h"
#include "pupilnet/geometry.h"
#include "pupilnet/image.h"

namespace pupilnet {

/// Hand-labeled (or rendered) pupil center in original-resolution pixels.
struct PupilLabel {
    std::string image_id;
    double x = 0.0;
    double y = 0.0;

    Point center() const { return {x, y}; }
    bool operator==(const PupilLabel&) const = default;
};

/// Raised for malformed label files; the message carries the line number.
class LabelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `image_id,x,y` lines. A first line whose coordinates are not numeric
/// is taken as a header. Blank lines are skipped.
std::vector<PupilLabel> read_labels(std::istream& in);
std::vector<PupilLabel> load_labels(const std::filesystem::path& path);

/// Writes the header `image_id,x,y` followed by one line per label, with
/// coordinates in shortest round-trip decimal form.
void write_labels(std::span<const PupilLabel> labels, std::ostream& out);
void save_labels(std::span<const PupilLabel> labels, const std::filesystem::path& path);

/// Throws LabelError unless 0 <= x < width and 0 <= y < height.
void check_label_bounds(const PupilLabel& label, int width, int height);

/// A window to cut from an image, with its training target.
struct SampleWindow {
    int left = 0;
    int top = 0;
    int target = 0;
};

struct Offset {
    int dx = 0;
    int dy = 0;
    bool operator==(const Offset&) const = default;
};

/// 3x3 neighborhood of the anchor window: 9 positive offsets.
std::vector<Offset> coarse_valid_offsets();
/// 8 directions (45 degree steps) on the Chebyshev rings r = 2..5: 32 negative offsets.
std::vector<Offset> coarse_invalid_offsets();
/// round(5 cos t, 5 sin t) for t = k * 45 degrees: 8 negative offsets.
std::vector<Offset> fine_invalid_offsets();

/// Counts labels whose offset grid had to be moved inward to fit the image.
struct GenerationStats {
    std::size_t clamped = 0;
};

/// Coarse windows for a label in downscaled coordinates: anchor = window whose
/// center is nearest the label, clamped so all 41 windows fit.
std::vector<SampleWindow> plan_coarse_windows(int width, int height, int window, Point label_ds,
                                              bool* clamped = nullptr);
/// Fine windows: anchor centered on the rounded label, clamped so all 9 fit.
std::vector<SampleWindow> plan_fine_windows(int width, int height, int window, Point label,
                                            bool* clamped = nullptr);

/// 9 valid + 32 invalid samples of side `window` (24 for the coarse presets).
std::vector<TrainingSample> gen_coarse_samples(const GrayImage& downscaled, const PupilLabel& label_ds,
                                               int window = 24, GenerationStats* stats = nullptr);

/// 1 valid + 8 invalid samples of side `window` (89 for F_K8P8).
std::vector<TrainingSample> gen_fine_samples(const GrayImage& image, const PupilLabel& label,
                                             int window = 89, GenerationStats* stats = nullptr);

/// Indices kept by subsample_fine for the given targets: a seeded-random
/// round-half-up 50% of the positives and 25% of the negatives, ascending.
std::vector<std::size_t> subsample_indices(std::span<const int> targets, std::uint64_t seed);

std::vector<TrainingSample> subsample_fine(std::span<const TrainingSample> samples, std::uint64_t seed);

/// Seeded partition into round-half-up(n * fraction) training labels and the
/// rest; both keep the input order.
std::pair<std::vector<PupilLabel>, std::vector<PupilLabel>> split_dataset(std::span<const PupilLabel> labels,
                                                                          double fraction, std::uint64_t seed);

}  // namespace pupilnet
