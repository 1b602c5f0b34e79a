#include "pupilnet/eval.h"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pupilnet/image.h"

namespace pupilnet {

EvalCurve detection_rate_curve(std::span<const Point> predictions, std::span<const Point> labels, int t_max) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("detection_rate_curve: " + std::to_string(predictions.size()) +
                                    " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw std::invalid_argument("detection_rate_curve: no predictions");
    if (t_max < 0) throw std::invalid_argument("detection_rate_curve: negative t_max");

    std::vector<std::size_t> hits(static_cast<std::size_t>(t_max) + 1, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = distance(predictions[i], labels[i]);
        for (int t = 0; t <= t_max; ++t)
            if (d <= t) ++hits[static_cast<std::size_t>(t)];
    }
    EvalCurve curve;
    curve.rates.reserve(hits.size());
    for (std::size_t h : hits) curve.rates.push_back(static_cast<double>(h) / static_cast<double>(predictions.size()));
    return curve;
}

namespace {

std::string format_rate(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", r);
    return buf;
}

}  // namespace

void write_curve_csv(const EvalCurve& curve, std::ostream& out) {
    out << "threshold,rate\n";
    for (int t = 0; t <= curve.t_max(); ++t) out << t << ',' << format_rate(curve.at(t)) << '\n';
}

void compare_runs(std::span<const NamedCurve> curves, std::ostream& out) {
    if (curves.empty()) throw std::invalid_argument("compare_runs: no curves");
    const int t_max = curves.front().second.t_max();
    for (const auto& [name, curve] : curves)
        if (curve.t_max() != t_max)
            throw std::invalid_argument("compare_runs: curve '" + name + "' has t_max " +
                                        std::to_string(curve.t_max()) + ", expected " + std::to_string(t_max));
    out << "threshold";
    for (const auto& c : curves) out << ',' << c.first;
    out << '\n';
    for (int t = 0; t <= t_max; ++t) {
        out << t;
        for (const auto& c : curves) out << ',' << format_rate(c.second.at(t));
        out << '\n';
    }
}

FlopBreakdown flop_accounting(const CnnConfig& config, int width, int height) {
    config.validate();
    const int s = config.input_size;
    if (width < s || height < s) throw std::invalid_argument("flop_accounting: image smaller than the window");
    const auto u = [](int v) { return static_cast<std::uint64_t>(v); };
    const std::uint64_t kernel_area = u(config.kernel_size) * u(config.kernel_size);
    const std::uint64_t conv_area = u(config.conv_side()) * u(config.conv_side());
    const std::uint64_t pooled_area = u(config.pooled_side()) * u(config.pooled_side());

    FlopBreakdown f;
    f.conv_flops = conv_area * kernel_area * u(config.num_filters);
    f.pool_flops = kernel_area * u(config.num_filters);
    f.fc_flops = pooled_area * u(config.num_filters) * u(config.num_perceptrons);
    f.out_flops = u(config.num_perceptrons);
    f.total = f.conv_flops + f.pool_flops + f.fc_flops + f.out_flops;
    f.runs_per_image = u(width - s + 1) * u(height - s + 1);
    f.image_total = f.total * f.runs_per_image;
    return f;
}

MacBreakdown multiply_accumulate_count(const CnnConfig& config) {
    config.validate();
    const auto u = [](int v) { return static_cast<std::uint64_t>(v); };
    MacBreakdown m;
    m.conv = u(config.conv_side()) * u(config.conv_side()) * u(config.kernel_size) * u(config.kernel_size) *
             u(config.num_filters);
    m.pool = u(config.pooled_side()) * u(config.pooled_side()) * u(config.pool_window) * u(config.pool_window) *
             u(config.num_filters);
    m.fc = u(config.fc_inputs()) * u(config.num_perceptrons);
    m.out = u(config.num_perceptrons);
    m.total = m.conv + m.pool + m.fc + m.out;
    return m;
}

GrayImage normalized_map(std::span<const double> weights, int side) {
    if (weights.size() != static_cast<std::size_t>(side) * side)
        throw std::invalid_argument("normalized_map: weight count is not side^2");
    const auto [lo_it, hi_it] = std::minmax_element(weights.begin(), weights.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    std::vector<double> px(weights.size(), 0.5);
    if (range > 0.0)
        for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::clamp((weights[i] - lo) / range, 0.0, 1.0);
    return GrayImage(side, side, std::move(px));
}

GrayImage sign_map(std::span<const double> weights, int side) {
    if (weights.size() != static_cast<std::size_t>(side) * side)
        throw std::invalid_argument("sign_map: weight count is not side^2");
    std::vector<double> px(weights.size());
    std::transform(weights.begin(), weights.end(), px.begin(), [](double w) { return w >= 0.0 ? 1.0 : 0.0; });
    return GrayImage(side, side, std::move(px));
}

namespace {

GrayImage replicate(const GrayImage& image, int scale) {
    std::vector<double> px(static_cast<std::size_t>(image.width()) * scale * image.height() * scale);
    const int w = image.width() * scale;
    for (int y = 0; y < image.height() * scale; ++y)
        for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y) * w + x] = image.at(x / scale, y / scale);
    return GrayImage(w, image.height() * scale, std::move(px));
}

}  // namespace

std::size_t dump_filters(const CnnModel& model, int scale, const std::filesystem::path& directory) {
    model.validate();
    if (scale < 1) throw std::invalid_argument("dump_filters: scale must be >= 1");
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw std::runtime_error("cannot create " + directory.string() + ": " + ec.message());

    const CnnConfig& cfg = model.config;
    const int k = cfg.kernel_size;
    const auto k2 = static_cast<std::size_t>(k) * k;
    const int ps = cfg.pooled_side();
    const auto ps2 = static_cast<std::size_t>(ps) * ps;
    const auto inputs = static_cast<std::size_t>(cfg.fc_inputs());
    std::size_t written = 0;

    for (int f = 0; f < cfg.num_filters; ++f) {
        const auto kernel = std::span(model.weights.conv_kernels).subspan(f * k2, k2);
        const std::string idx = std::to_string(f);
        save_pgm(bicubic_resize(normalized_map(kernel, k), {scale, 1}), directory / ("filter_" + idx + ".pgm"));
        save_pgm(replicate(sign_map(kernel, k), scale), directory / ("sign_" + idx + ".pgm"));
        written += 2;
    }
    for (int p = 0; p < cfg.num_perceptrons; ++p)
        for (int f = 0; f < cfg.num_filters; ++f) {
            const auto map = std::span(model.weights.fc_weights).subspan(p * inputs + f * ps2, ps2);
            save_pgm(bicubic_resize(normalized_map(map, ps), {scale, 1}),
                     directory / ("fc_p" + std::to_string(p) + "_f" + std::to_string(f) + ".pgm"));
            ++written;
        }
    return written;
}

}  // namespace pupilnet
