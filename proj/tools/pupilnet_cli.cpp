// pupilnet: command-line front end for synthetic data, training, detection,
// evaluation and model inspection.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pupilnet/cnn.h"
#include "pupilnet/eval.h"
#include "pupilnet/model_io.h"
#include "pupilnet/parallel.h"
#include "pupilnet/pipeline.h"
#include "pupilnet/presets.h"
#include "pupilnet/random.h"
#include "pupilnet/workflow.h"

namespace fs = std::filesystem;
using namespace pupilnet;

namespace {

struct SynthArgs {
    std::size_t count = 100;
    std::uint64_t seed = 1;
    fs::path out_dir;
    SynthSpec spec;
};

struct TrainArgs {
    std::string stage = "coarse";
    std::string preset_name;
    fs::path images;
    fs::path labels;
    double train_fraction = 0.0;
    int epochs = 10;
    int batch = 500;
    double lr = 1.0;
    std::uint64_t seed = 1;
    int factor = 4;
    fs::path model_out;
    fs::path loss_log;
};

struct DetectArgs {
    std::string mode = "two-stage";
    fs::path coarse_model;
    fs::path fine_model;
    fs::path single_model;
    std::vector<fs::path> inputs;
    fs::path output;
    int factor = 4;
    int radius = 10;
    int ray_range = 30;
};

struct EvalArgs {
    fs::path results;
    fs::path labels;
    int t_max = 15;
    fs::path out;
};

struct InspectArgs {
    fs::path model;
    fs::path out_dir;
    int scale = 20;
    int width = 96;
    int height = 72;
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

int run_synth(const SynthArgs& a) {
    const auto labels = write_synthetic_corpus(a.spec, a.count, a.seed, a.out_dir);
    std::cout << "wrote " << labels.size() << " images and labels.csv to " << a.out_dir.string() << '\n';
    return 0;
}

int run_train(const TrainArgs& a) {
    const Stage stage = parse_stage(a.stage);
    const std::string name = a.preset_name.empty()
                                 ? (stage == Stage::Coarse ? "C_K8P8" : stage == Stage::Fine ? "F_K8P8" : "S_K8P8")
                                 : a.preset_name;
    const CnnConfig config = preset(name);
    if (preset_stage(name) != stage)
        throw std::invalid_argument("preset " + name + " is a " + stage_name(preset_stage(name)) +
                                    " preset, not usable for stage " + a.stage);

    auto labels = load_labels(a.labels);
    if (a.train_fraction > 0.0 && a.train_fraction < 1.0)
        labels = split_dataset(labels, a.train_fraction, derive_seed(a.seed, "split")).first;
    else if (a.train_fraction != 0.0 && a.train_fraction != 1.0)
        throw std::invalid_argument("--train-fraction must be in (0,1]");

    const fs::path image_dir = a.images.empty() ? a.labels.parent_path() : a.images;
    TrainingSet set = build_training_set(stage, config, image_dir, labels, a.factor, a.seed);
    if (set.stats.clamped > 0)
        std::cerr << "warning: " << set.stats.clamped << " label(s) too close to the border; sample grid moved inward\n";
    std::cout << "training " << name << " on " << set.samples.size() << " samples from " << labels.size()
              << " images\n";

    TrainOptions opts;
    opts.epochs = a.epochs;
    opts.batch_size = a.batch;
    opts.learning_rate = a.lr;
    opts.seed = derive_seed(a.seed, "shuffle");
    opts.workers = worker_count();
    opts.on_epoch = [](int epoch, double loss) { std::cout << "epoch " << epoch << " loss " << loss << '\n'; };
    const TrainResult result = train(init_model(config, derive_seed(a.seed, "init")), set.samples, opts);

    if (a.model_out.has_parent_path()) fs::create_directories(a.model_out.parent_path());
    save_model(result.model, a.model_out);
    const fs::path loss_path = a.loss_log.empty() ? fs::path(a.model_out.string() + ".loss.csv") : a.loss_log;
    auto out = open_out(loss_path);
    write_loss_csv(result.loss_history, out);
    return 0;
}

int run_detect(const DetectArgs& a) {
    PipelineConfig cfg;
    cfg.mode = parse_mode(a.mode);
    cfg.downscale_factor = a.factor;
    cfg.refine_radius = a.radius;
    cfg.ray_range = a.ray_range;
    cfg.workers = worker_count();
    // models are checked against their stage's window geometry, not a fixed preset
    cfg.coarse_preset.clear();
    cfg.fine_preset.clear();
    cfg.single_preset.clear();

    PipelineModels models;
    const auto need = [&](const fs::path& p, const char* flag) {
        if (p.empty()) throw std::invalid_argument(std::string("mode ") + a.mode + " requires " + flag);
        return load_model(p);
    };
    if (cfg.mode == DetectMode::SingleStage) {
        models.single = need(a.single_model, "--single-model");
    } else {
        models.coarse = need(a.coarse_model, "--coarse-model");
        if (cfg.mode == DetectMode::TwoStage) models.fine = need(a.fine_model, "--fine-model");
    }

    std::vector<fs::path> images;
    for (const auto& in : a.inputs) {
        if (fs::is_directory(in)) {
            const auto listed = list_images(in);
            images.insert(images.end(), listed.begin(), listed.end());
        } else {
            images.push_back(in);
        }
    }

    std::vector<DetectionRow> rows;
    for (const auto& path : images) rows.push_back({path.filename().string(), detect(cfg, models, load_pgm(path))});
    auto out = open_out(a.output);
    write_results_csv(rows, out);
    std::cout << "detected " << rows.size() << " image(s) -> " << a.output.string() << '\n';
    return 0;
}

int run_eval(const EvalArgs& a) {
    std::ifstream in(a.results);
    if (!in) throw std::runtime_error("cannot open " + a.results.string());
    const auto rows = read_results_csv(in);
    const auto labels = load_labels(a.labels);
    const EvalCurve curve = evaluate_results(rows, labels, a.t_max);
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        write_curve_csv(curve, out);
    }
    char line[64];
    std::snprintf(line, sizeof(line), "rate@5px=%.3f", a.t_max >= 5 ? curve.at(5) : 0.0);
    std::cout << line << '\n';
    return 0;
}

int run_inspect(const InspectArgs& a) {
    const CnnModel model = load_model(a.model);
    const std::size_t files = dump_filters(model, a.scale, a.out_dir);
    const FlopBreakdown f = flop_accounting(model.config, a.width, a.height);
    const MacBreakdown m = multiply_accumulate_count(model.config);
    auto out = open_out(a.out_dir / "flops.csv");
    out << "term,flops,macs\n"
        << "conv," << f.conv_flops << ',' << m.conv << '\n'
        << "pool," << f.pool_flops << ',' << m.pool << '\n'
        << "fc," << f.fc_flops << ',' << m.fc << '\n'
        << "out," << f.out_flops << ',' << m.out << '\n'
        << "total," << f.total << ',' << m.total << '\n'
        << "runs_per_image," << f.runs_per_image << ',' << f.runs_per_image << '\n'
        << "image_total," << f.image_total << ',' << m.total * f.runs_per_image << '\n';
    std::cout << "wrote " << files << " weight images and flops.csv to " << a.out_dir.string() << '\n';
    return 0;
}

void add_range(CLI::App* app, const std::string& name, Range& r, const std::string& what) {
    app->add_option("--" + name + "-min", r.lo, what + " (lower bound)")->capture_default_str();
    app->add_option("--" + name + "-max", r.hi, what + " (upper bound)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pupilnet: coarse-to-fine CNN pupil detection"};
    app.set_config("--config", "", "key=value configuration file (flags override it)");
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "render a synthetic eye-image corpus");
    s->add_option("--count", synth.count, "number of images")->capture_default_str();
    s->add_option("--seed", synth.seed, "random seed")->capture_default_str();
    s->add_option("--out", synth.out_dir, "output directory")->required();
    s->add_option("--width", synth.spec.width)->capture_default_str();
    s->add_option("--height", synth.spec.height)->capture_default_str();
    s->add_option("--margin", synth.spec.margin)->capture_default_str();
    s->add_option("--noise", synth.spec.noise_sigma, "additive Gaussian noise sigma")->capture_default_str();
    add_range(s, "pupil-radius", synth.spec.pupil_radius, "pupil semi-major axis, px");
    add_range(s, "iris-radius", synth.spec.iris_radius, "iris radius, px");
    add_range(s, "aspect", synth.spec.aspect, "pupil minor/major ratio");
    add_range(s, "gradient", synth.spec.gradient, "shadow strength");
    add_range(s, "blur", synth.spec.blur_sigma, "blur sigma, px");
    s->add_option("--reflections-min", synth.spec.reflection_count.lo)->capture_default_str();
    s->add_option("--reflections-max", synth.spec.reflection_count.hi)->capture_default_str();
    s->add_option("--dark-spots-min", synth.spec.dark_spot_count.lo)->capture_default_str();
    s->add_option("--dark-spots-max", synth.spec.dark_spot_count.hi)->capture_default_str();

    TrainArgs train_args;
    auto* t = app.add_subcommand("train", "train a stage CNN on a labeled corpus");
    t->add_option("--stage", train_args.stage, "coarse | fine | single")->capture_default_str();
    t->add_option("--preset", train_args.preset_name, "C_K4P8 C_K8P8 C_K8P16 C_K16P32 F_K8P8 S_K8P8");
    t->add_option("--images", train_args.images, "image directory (default: labels file directory)");
    t->add_option("--labels", train_args.labels, "labels CSV")->required();
    t->add_option("--train-fraction", train_args.train_fraction, "train on a seeded split of this fraction");
    t->add_option("--epochs", train_args.epochs)->capture_default_str();
    t->add_option("--batch", train_args.batch)->capture_default_str();
    t->add_option("--lr", train_args.lr)->capture_default_str();
    t->add_option("--seed", train_args.seed)->capture_default_str();
    t->add_option("--factor", train_args.factor, "downscale factor")->capture_default_str();
    t->add_option("--model-out", train_args.model_out)->required();
    t->add_option("--loss-log", train_args.loss_log, "per-epoch loss CSV (default: <model-out>.loss.csv)");

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "locate pupils in images");
    d->add_option("--mode", det.mode, "two-stage | single-stage | coarse-only | coarse+ray")->capture_default_str();
    d->add_option("--coarse-model", det.coarse_model);
    d->add_option("--fine-model", det.fine_model);
    d->add_option("--single-model", det.single_model);
    d->add_option("--input", det.inputs, "image file or directory (repeatable)")->required();
    d->add_option("--output", det.output, "results CSV")->required();
    d->add_option("--factor", det.factor)->capture_default_str();
    d->add_option("--radius", det.radius, "fine search radius, px")->capture_default_str();
    d->add_option("--ray-range", det.ray_range)->capture_default_str();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "detection-rate curve of results against labels");
    e->add_option("--results", ev.results)->required();
    e->add_option("--labels", ev.labels)->required();
    e->add_option("--t-max", ev.t_max)->capture_default_str();
    e->add_option("--out", ev.out, "curve CSV");

    InspectArgs ins;
    auto* i = app.add_subcommand("inspect", "dump weight images and the FLOP report of a model");
    i->add_option("--model", ins.model)->required();
    i->add_option("--out", ins.out_dir)->required();
    i->add_option("--scale", ins.scale)->capture_default_str();
    i->add_option("--width", ins.width, "downscaled image width for the FLOP report")->capture_default_str();
    i->add_option("--height", ins.height)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (s->parsed()) return run_synth(synth);
        if (t->parsed()) return run_train(train_args);
        if (d->parsed()) return run_detect(det);
        if (e->parsed()) return run_eval(ev);
        if (i->parsed()) return run_inspect(ins);
    } catch (const std::exception& ex) {
        std::cerr << "pupilnet: error: " << ex.what() << '\n';
        return 1;
    }
    return 1;
}
