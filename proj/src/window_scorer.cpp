#include "pupilnet/window_scorer.h"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "pupilnet/parallel.h"

namespace pupilnet {

WindowScorer::WindowScorer(const CnnModel& model, const GrayImage& image)
    : WindowScorer(model, image, Region{0, 0, image.width(), image.height()}) {}

WindowScorer::WindowScorer(const CnnModel& model, const GrayImage& image, Region region)
    : model_(model), region_(region) {
    const CnnConfig& cfg = model.config;
    if (region.left < 0 || region.top < 0 || region.left + region.width > image.width() ||
        region.top + region.height > image.height() || region.width < cfg.input_size ||
        region.height < cfg.input_size) {
        std::ostringstream msg;
        msg << "scoring region " << region.width << "x" << region.height << " at (" << region.left << ","
            << region.top << ") does not fit a " << cfg.input_size << "x" << cfg.input_size
            << " window inside the " << image.width() << "x" << image.height() << " image";
        throw PatchOutOfBounds(msg.str());
    }
    const int k = cfg.kernel_size;
    map_width_ = region.width - k + 1;
    map_height_ = region.height - k + 1;
    const auto map_len = static_cast<std::size_t>(map_width_) * map_height_;
    const auto k2 = static_cast<std::size_t>(k) * k;

    std::vector<double> plane(static_cast<std::size_t>(region.width) * region.height);
    for (int y = 0; y < region.height; ++y) {
        const auto src = image.row(region.top + y).subspan(static_cast<std::size_t>(region.left),
                                                           static_cast<std::size_t>(region.width));
        std::copy(src.begin(), src.end(), plane.begin() + static_cast<std::ptrdiff_t>(y) * region.width);
    }

    maps_.resize(cfg.num_filters * map_len);
    for (int f = 0; f < cfg.num_filters; ++f) {
        std::span<double> map(maps_.data() + f * map_len, map_len);
        detail::correlate_valid(plane, region.width, region.height,
                                std::span(model.weights.conv_kernels).subspan(f * k2, k2), k, map);
        const double bias = model.weights.conv_biases[static_cast<std::size_t>(f)];
        for (double& v : map) v = logistic(v + bias);
    }
}

double WindowScorer::logit(int left, int top) const {
    const CnnConfig& cfg = model_.config;
    const int x = left - region_.left;
    const int y = top - region_.top;
    if (x < 0 || y < 0 || x + cfg.input_size > region_.width || y + cfg.input_size > region_.height)
        throw PatchOutOfBounds("window outside the scoring region");
    const auto map_len = static_cast<std::size_t>(map_width_) * map_height_;
    const auto ps2 = static_cast<std::size_t>(cfg.pooled_side()) * cfg.pooled_side();
    std::vector<double> pooled(cfg.num_filters * ps2);
    std::vector<double> hidden(static_cast<std::size_t>(cfg.num_perceptrons));
    for (int f = 0; f < cfg.num_filters; ++f) {
        const double* origin = maps_.data() + f * map_len + static_cast<std::size_t>(y) * map_width_ + x;
        detail::average_pool(origin, map_width_, cfg, pooled.data() + f * ps2);
    }
    return detail::dense_head(model_, pooled, hidden);
}

double WindowScorer::rating(int left, int top) const {
    return rating_from_logit(logit(left, top));
}

namespace {

// Strict "better than": higher logit, else smaller row-major position.
bool better(const WindowHit& a, const WindowHit& b) {
    if (a.logit != b.logit) return a.logit > b.logit;
    if (a.top != b.top) return a.top < b.top;
    return a.left < b.left;
}

}  // namespace

WindowHit best_window(const WindowScorer& scorer, int left_min, int left_max, int top_min, int top_max,
                      std::size_t workers) {
    if (left_max < left_min || top_max < top_min) throw std::invalid_argument("best_window: empty sweep");
    const auto rows = static_cast<std::size_t>(top_max - top_min + 1);
    const auto cols = static_cast<std::size_t>(left_max - left_min + 1);
    std::vector<WindowHit> partial(std::max<std::size_t>(1, std::min(workers, rows)));
    std::vector<char> used(partial.size(), 0);

    const std::size_t parts = partial.size();
    const std::size_t chunk = (rows + parts - 1) / parts;
    parallel_for(parts, parts, [&](std::size_t begin, std::size_t end) {
        for (std::size_t part = begin; part < end; ++part) {
            const std::size_t r0 = part * chunk;
            const std::size_t r1 = std::min(rows, r0 + chunk);
            for (std::size_t r = r0; r < r1; ++r) {
                const int top = top_min + static_cast<int>(r);
                for (int left = left_min; left <= left_max; ++left) {
                    WindowHit hit{left, top, scorer.logit(left, top), 0.0, 0};
                    if (!used[part] || better(hit, partial[part])) {
                        partial[part] = hit;
                        used[part] = 1;
                    }
                }
            }
        }
    });

    WindowHit best;
    bool have = false;
    for (std::size_t p = 0; p < parts; ++p) {
        if (!used[p]) continue;
        if (!have || better(partial[p], best)) {
            best = partial[p];
            have = true;
        }
    }
    best.rating = rating_from_logit(best.logit);
    best.evaluations = rows * cols;
    return best;
}

}  // namespace pupilnet
