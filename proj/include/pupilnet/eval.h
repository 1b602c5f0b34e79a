#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pupilnet/cnn.h"
#include "pupilnet/geometry.h"
#include "pupilnet/image.h"

namespace pupilnet {

/// Detection rate at each integer pixel threshold 0..t_max.
struct EvalCurve {
    std::vector<double> rates;

    int t_max() const { return static_cast<int>(rates.size()) - 1; }
    double at(int threshold) const { return rates.at(static_cast<std::size_t>(threshold)); }
    bool operator==(const EvalCurve&) const = default;
};

/// rate(t) = fraction of pairs whose Euclidean distance is <= t.
EvalCurve detection_rate_curve(std::span<const Point> predictions, std::span<const Point> labels, int t_max);

/// `threshold,rate` CSV, one row per threshold.
void write_curve_csv(const EvalCurve& curve, std::ostream& out);

using NamedCurve = std::pair<std::string, EvalCurve>;

/// Wide CSV `threshold,<name1>,<name2>,...`; all curves must share t_max.
void compare_runs(std::span<const NamedCurve> curves, std::ostream& out);

/// Per-run FLOP count in the printed cost convention for this architecture:
/// conv = conv_area * kernel_area * filters, pool = kernel_area * filters,
/// fc = pooled_area * filters * perceptrons, out = perceptrons.
struct FlopBreakdown {
    std::uint64_t conv_flops = 0;
    std::uint64_t pool_flops = 0;
    std::uint64_t fc_flops = 0;
    std::uint64_t out_flops = 0;
    std::uint64_t total = 0;
    std::uint64_t runs_per_image = 0;
    std::uint64_t image_total = 0;
};

/// Cost of sweeping `config` at stride 1 over a width x height image.
FlopBreakdown flop_accounting(const CnnConfig& config, int width, int height);

/// Multiply-accumulates actually performed by forward() per run (biases and
/// activations excluded): conv = conv_area * kernel_area * filters,
/// pool = pooled_area * pool_area * filters, fc = fc_inputs * perceptrons,
/// out = perceptrons.
struct MacBreakdown {
    std::uint64_t conv = 0;
    std::uint64_t pool = 0;
    std::uint64_t fc = 0;
    std::uint64_t out = 0;
    std::uint64_t total = 0;
};

MacBreakdown multiply_accumulate_count(const CnnConfig& config);

/// Writes filter_<i>.pgm, sign_<i>.pgm and fc_p<j>_f<i>.pgm (0-based) into
/// `directory`. Weight maps are normalized to [0,1] (constant maps become 0.5)
/// and bicubically enlarged by `scale`; sign maps are white for weights >= 0
/// and enlarged by pixel replication. Returns the number of files written.
std::size_t dump_filters(const CnnModel& model, int scale, const std::filesystem::path& directory);

/// Normalized and sign renderings of one weight map (exposed for tests).
GrayImage normalized_map(std::span<const double> weights, int side);
GrayImage sign_map(std::span<const double> weights, int side);

}  // namespace pupilnet
