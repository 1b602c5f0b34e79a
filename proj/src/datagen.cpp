#include "pupilnet/datagen.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "pupilnet/random.h"

namespace pupilnet {

// --- labels -------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool parse_double(const std::string& text, double& value) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && std::isfinite(value);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

}  // namespace

std::vector<PupilLabel> read_labels(std::istream& in) {
    std::vector<PupilLabel> labels;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        if (line.back() == ',') fields.emplace_back();

        PupilLabel label;
        const bool shaped = fields.size() == 3 && !fields[0].empty();
        const bool numeric = shaped && parse_double(fields[1], label.x) && parse_double(fields[2], label.y);
        if (!numeric) {
            if (labels.empty() && seen.empty() && line_no == 1 && fields.size() == 3) continue;  // header
            throw LabelError("labels line " + std::to_string(line_no) + ": expected image_id,x,y but got '" +
                             line + "'");
        }
        label.image_id = fields[0];
        if (!seen.insert(label.image_id).second)
            throw LabelError("labels line " + std::to_string(line_no) + ": duplicate image_id '" +
                             label.image_id + "'");
        labels.push_back(std::move(label));
    }
    return labels;
}

std::vector<PupilLabel> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LabelError("cannot open labels file " + path.string());
    try {
        return read_labels(in);
    } catch (const LabelError& e) {
        throw LabelError(path.string() + ": " + e.what());
    }
}

void write_labels(std::span<const PupilLabel> labels, std::ostream& out) {
    out << "image_id,x,y\n";
    for (const auto& l : labels) out << l.image_id << ',' << format_double(l.x) << ',' << format_double(l.y) << '\n';
}

void save_labels(std::span<const PupilLabel> labels, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_labels(labels, out);
}

void check_label_bounds(const PupilLabel& label, int width, int height) {
    if (!(label.x >= 0.0 && label.x < width && label.y >= 0.0 && label.y < height)) {
        std::ostringstream msg;
        msg << "label '" << label.image_id << "' at (" << label.x << "," << label.y << ") outside " << width
            << "x" << height << " image";
        throw LabelError(msg.str());
    }
}

// --- offsets ------------------------------------------------------------------

std::vector<Offset> coarse_valid_offsets() {
    std::vector<Offset> out;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) out.push_back({dx, dy});
    return out;
}

namespace {

// Unit steps of the 8 compass directions, counter-clockwise from +x.
constexpr Offset kDirections[8] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

}  // namespace

std::vector<Offset> coarse_invalid_offsets() {
    std::vector<Offset> out;
    for (int r = 2; r <= 5; ++r)
        for (const Offset& d : kDirections) out.push_back({r * d.dx, r * d.dy});
    return out;
}

std::vector<Offset> fine_invalid_offsets() {
    std::vector<Offset> out;
    for (int k = 0; k < 8; ++k) {
        const double theta = k * std::numbers::pi / 4.0;
        out.push_back({static_cast<int>(std::lround(5.0 * std::cos(theta))),
                       static_cast<int>(std::lround(5.0 * std::sin(theta)))});
    }
    return out;
}

// --- sample generation ----------------------------------------------------------

namespace {

constexpr int kCoarseReach = 5;
constexpr int kFineReach = 5;

struct Anchor {
    int left = 0;
    int top = 0;
    bool clamped = false;
};

Anchor place_anchor(int width, int height, int window, Point label, int reach) {
    const int lo = reach;
    const int hi_x = width - window - reach;
    const int hi_y = height - window - reach;
    if (hi_x < lo || hi_y < lo) {
        std::ostringstream msg;
        msg << width << "x" << height << " image too small for " << window << "px windows shifted by " << reach;
        throw std::invalid_argument(msg.str());
    }
    const int left = round_half_up(label.x - center_offset(window));
    const int top = round_half_up(label.y - center_offset(window));
    Anchor a{std::clamp(left, lo, hi_x), std::clamp(top, lo, hi_y), false};
    a.clamped = a.left != left || a.top != top;
    return a;
}

std::vector<TrainingSample> cut(const GrayImage& image, int window, const std::vector<SampleWindow>& plan) {
    std::vector<TrainingSample> samples(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        samples[i].patch.resize(static_cast<std::size_t>(window) * window);
        samples[i].target = plan[i].target;
        extract_window(image, plan[i].left, plan[i].top, window, samples[i].patch);
    }
    return samples;
}

}  // namespace

std::vector<SampleWindow> plan_coarse_windows(int width, int height, int window, Point label_ds, bool* clamped) {
    const Anchor a = place_anchor(width, height, window, label_ds, kCoarseReach);
    if (clamped) *clamped = a.clamped;
    std::vector<SampleWindow> plan;
    for (const Offset& o : coarse_valid_offsets()) plan.push_back({a.left + o.dx, a.top + o.dy, 1});
    for (const Offset& o : coarse_invalid_offsets()) plan.push_back({a.left + o.dx, a.top + o.dy, 0});
    return plan;
}

std::vector<SampleWindow> plan_fine_windows(int width, int height, int window, Point label, bool* clamped) {
    const Anchor a = place_anchor(width, height, window, label, kFineReach);
    if (clamped) *clamped = a.clamped;
    std::vector<SampleWindow> plan{{a.left, a.top, 1}};
    for (const Offset& o : fine_invalid_offsets()) plan.push_back({a.left + o.dx, a.top + o.dy, 0});
    return plan;
}

std::vector<TrainingSample> gen_coarse_samples(const GrayImage& downscaled, const PupilLabel& label_ds, int window,
                                               GenerationStats* stats) {
    bool clamped = false;
    const auto plan = plan_coarse_windows(downscaled.width(), downscaled.height(), window, label_ds.center(), &clamped);
    if (stats && clamped) ++stats->clamped;
    return cut(downscaled, window, plan);
}

std::vector<TrainingSample> gen_fine_samples(const GrayImage& image, const PupilLabel& label, int window,
                                             GenerationStats* stats) {
    bool clamped = false;
    const auto plan = plan_fine_windows(image.width(), image.height(), window, label.center(), &clamped);
    if (stats && clamped) ++stats->clamped;
    return cut(image, window, plan);
}

// --- subsampling and splits -------------------------------------------------------

std::vector<std::size_t> subsample_indices(std::span<const int> targets, std::uint64_t seed) {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < targets.size(); ++i) (targets[i] == 1 ? positives : negatives).push_back(i);

    Rng rng(seed);
    rng.shuffle(std::span(positives));
    rng.shuffle(std::span(negatives));
    positives.resize((positives.size() + 1) / 2);  // round half up of 50%
    negatives.resize((negatives.size() + 2) / 4);  // round half up of 25%

    std::vector<std::size_t> kept(positives);
    kept.insert(kept.end(), negatives.begin(), negatives.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<TrainingSample> subsample_fine(std::span<const TrainingSample> samples, std::uint64_t seed) {
    std::vector<int> targets(samples.size());
    std::transform(samples.begin(), samples.end(), targets.begin(), [](const auto& s) { return s.target; });
    std::vector<TrainingSample> out;
    for (std::size_t i : subsample_indices(targets, seed)) out.push_back(samples[i]);
    return out;
}

std::pair<std::vector<PupilLabel>, std::vector<PupilLabel>> split_dataset(std::span<const PupilLabel> labels,
                                                                          double fraction, std::uint64_t seed) {
    if (labels.empty()) throw std::invalid_argument("split_dataset: no labels");
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span(order));
    const auto train_count = static_cast<std::size_t>(round_half_up(static_cast<double>(labels.size()) * fraction));
    std::vector<char> in_train(labels.size(), 0);
    for (std::size_t i = 0; i < train_count; ++i) in_train[order[i]] = 1;

    std::pair<std::vector<PupilLabel>, std::vector<PupilLabel>> split;
    for (std::size_t i = 0; i < labels.size(); ++i) (in_train[i] ? split.first : split.second).push_back(labels[i]);
    return split;
}

}  // namespace pupilnet
