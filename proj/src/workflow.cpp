#include "pupilnet/workflow.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pupilnet/random.h"

namespace pupilnet {

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, ptr);
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& directory) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

std::vector<PupilLabel> write_synthetic_corpus(const SynthSpec& spec, std::size_t count, std::uint64_t seed,
                                               const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<PupilLabel> labels;
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "eye_%05zu.pgm", i);
        SynthImage eye = synth_eye(spec, derive_seed(seed, "synth/" + std::to_string(i)));
        eye.label.image_id = name;
        save_pgm(eye.image, out_dir / name);
        labels.push_back(eye.label);
    }
    save_labels(labels, out_dir / "labels.csv");
    return labels;
}

TrainingSet build_training_set(Stage stage, const CnnConfig& config, const std::filesystem::path& image_dir,
                               std::span<const PupilLabel> labels, int downscale_factor, std::uint64_t seed) {
    config.validate();
    TrainingSet set;
    const int window = config.input_size;

    if (stage != Stage::Fine) {
        set.samples.reserve(labels.size() * 41);
        for (const auto& label : labels) {
            const GrayImage image = load_pgm(image_dir / label.image_id);
            check_label_bounds(label, image.width(), image.height());
            const GrayImage small = downscale(image, downscale_factor);
            const PupilLabel label_ds{label.image_id, to_downscaled(label.x, downscale_factor),
                                      to_downscaled(label.y, downscale_factor)};
            auto samples = gen_coarse_samples(small, label_ds, window, &set.stats);
            std::move(samples.begin(), samples.end(), std::back_inserter(set.samples));
        }
        return set;
    }

    // Plan every fine window first, subsample, then cut only what is kept.
    struct Planned {
        std::size_t label;
        SampleWindow window;
    };
    std::vector<Planned> planned;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const GrayImage image = load_pgm(image_dir / labels[i].image_id);
        check_label_bounds(labels[i], image.width(), image.height());
        bool clamped = false;
        for (const auto& w : plan_fine_windows(image.width(), image.height(), window, labels[i].center(), &clamped))
            planned.push_back({i, w});
        if (clamped) ++set.stats.clamped;
    }
    std::vector<int> targets(planned.size());
    std::transform(planned.begin(), planned.end(), targets.begin(), [](const Planned& p) { return p.window.target; });
    const auto kept = subsample_indices(targets, derive_seed(seed, "subsample"));

    set.samples.reserve(kept.size());
    std::size_t loaded_label = labels.size();
    GrayImage image;
    for (std::size_t idx : kept) {
        const Planned& p = planned[idx];
        if (p.label != loaded_label) {
            image = load_pgm(image_dir / labels[p.label].image_id);
            loaded_label = p.label;
        }
        TrainingSample s;
        s.target = p.window.target;
        s.patch.resize(static_cast<std::size_t>(window) * window);
        extract_window(image, p.window.left, p.window.top, window, s.patch);
        set.samples.push_back(std::move(s));
    }
    return set;
}

void write_results_csv(std::span<const DetectionRow> rows, std::ostream& out) {
    out << "image_id,coarse_x,coarse_y,coarse_conf,fine_x,fine_y,fine_conf\n";
    for (const auto& row : rows) {
        const DetectionResult& r = row.result;
        out << row.image_id << ',' << format_number(r.coarse_x) << ',' << format_number(r.coarse_y) << ','
            << format_number(r.coarse_confidence) << ',' << format_number(r.fine_x) << ','
            << format_number(r.fine_y) << ',' << format_number(r.fine_confidence) << '\n';
    }
}

std::vector<DetectionRow> read_results_csv(std::istream& in) {
    std::vector<DetectionRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("image_id,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        const auto bad = [&] {
            return std::runtime_error("results line " + std::to_string(line_no) + ": malformed '" + line + "'");
        };
        if (f.size() != 7) throw bad();
        double v[6];
        for (int i = 0; i < 6; ++i) {
            const auto& s = f[static_cast<std::size_t>(i) + 1];
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[i]);
            if (ec != std::errc() || ptr != s.data() + s.size()) throw bad();
        }
        rows.push_back({f[0], {v[0], v[1], v[2], v[3], v[4], v[5]}});
    }
    return rows;
}

EvalCurve evaluate_results(std::span<const DetectionRow> rows, std::span<const PupilLabel> labels, int t_max) {
    std::map<std::string, Point> by_id;
    for (const auto& l : labels) by_id[l.image_id] = l.center();
    std::vector<Point> predicted;
    std::vector<Point> truth;
    for (const auto& row : rows) {
        const auto it = by_id.find(row.image_id);
        if (it == by_id.end()) throw LabelError("no label for result '" + row.image_id + "'");
        predicted.push_back(row.result.fine());
        truth.push_back(it->second);
    }
    return detection_rate_curve(predicted, truth, t_max);
}

void write_loss_csv(std::span<const double> loss_history, std::ostream& out) {
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < loss_history.size(); ++i) out << i + 1 << ',' << format_number(loss_history[i]) << '\n';
}

}  // namespace pupilnet
