#include "pupilnet/cnn.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pupilnet/parallel.h"
#include "pupilnet/random.h"

namespace pupilnet {

// --- config & parameters ------------------------------------------------------

int CnnConfig::pooled_side() const {
    if (pool_stride <= 0) return 0;
    const int span = conv_side() - pool_window;
    if (span < 0) return 0;
    return span / pool_stride + 1;
}

void CnnConfig::validate() const {
    std::ostringstream why;
    if (input_size < 1 || kernel_size < 1 || num_filters < 1 || pool_window < 1 ||
        pool_stride < 1 || num_perceptrons < 1)
        why << "all sizes and counts must be >= 1";
    else if (conv_stride != 1)
        why << "convolution stride must be 1 (got " << conv_stride << ")";
    else if (conv_side() < 1)
        why << "kernel " << kernel_size << " larger than input " << input_size;
    else if (pooled_side() < 1)
        why << "pool window " << pool_window << " larger than conv output " << conv_side();
    if (!why.str().empty()) throw InvalidConfig("invalid CNN config: " + why.str());
}

std::string layer_name(Layer layer) {
    switch (layer) {
        case Layer::ConvKernels: return "conv_kernels";
        case Layer::ConvBiases: return "conv_biases";
        case Layer::FcWeights: return "fc_weights";
        case Layer::FcBiases: return "fc_biases";
        case Layer::OutWeights: return "out_weights";
        case Layer::OutBias: return "out_bias";
    }
    return "unknown";
}

Parameters Parameters::zeros(const CnnConfig& config) {
    config.validate();
    const auto k2 = static_cast<std::size_t>(config.kernel_size) * config.kernel_size;
    const auto filters = static_cast<std::size_t>(config.num_filters);
    const auto perceptrons = static_cast<std::size_t>(config.num_perceptrons);
    Parameters p;
    p.conv_kernels.assign(filters * k2, 0.0);
    p.conv_biases.assign(filters, 0.0);
    p.fc_weights.assign(perceptrons * static_cast<std::size_t>(config.fc_inputs()), 0.0);
    p.fc_biases.assign(perceptrons, 0.0);
    p.out_weights.assign(perceptrons, 0.0);
    p.out_bias.assign(1, 0.0);
    return p;
}

std::span<double> Parameters::layer(Layer which) {
    switch (which) {
        case Layer::ConvKernels: return conv_kernels;
        case Layer::ConvBiases: return conv_biases;
        case Layer::FcWeights: return fc_weights;
        case Layer::FcBiases: return fc_biases;
        case Layer::OutWeights: return out_weights;
        case Layer::OutBias: return out_bias;
    }
    return {};
}

std::span<const double> Parameters::layer(Layer which) const {
    return const_cast<Parameters*>(this)->layer(which);
}

std::size_t Parameters::size() const {
    std::size_t n = 0;
    for (Layer l : kAllLayers) n += layer(l).size();
    return n;
}

bool Parameters::same_shape(const Parameters& other) const {
    return std::all_of(kAllLayers.begin(), kAllLayers.end(),
                       [&](Layer l) { return layer(l).size() == other.layer(l).size(); });
}

bool Parameters::all_finite() const {
    for (Layer l : kAllLayers)
        for (double v : layer(l))
            if (!std::isfinite(v)) return false;
    return true;
}

void Parameters::fill(double value) {
    for (Layer l : kAllLayers) std::ranges::fill(layer(l), value);
}

void Parameters::add_scaled(const Parameters& other, double scale) {
    if (!same_shape(other)) throw ShapeMismatch("add_scaled: parameter shapes differ");
    for (Layer l : kAllLayers) {
        auto dst = layer(l);
        const auto src = other.layer(l);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    }
}

void CnnModel::validate() const {
    config.validate();
    const Parameters expected = Parameters::zeros(config);
    for (Layer l : kAllLayers) {
        if (weights.layer(l).size() != expected.layer(l).size()) {
            std::ostringstream msg;
            msg << "model layer " << layer_name(l) << " has " << weights.layer(l).size()
                << " values, config implies " << expected.layer(l).size();
            throw ShapeMismatch(msg.str());
        }
    }
    if (!weights.all_finite()) throw std::domain_error("model contains non-finite weights");
}

// --- forward ------------------------------------------------------------------

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double rating_from_logit(double logit) { return std::clamp(logistic(logit), 0x1.0p-53, 1.0 - 0x1.0p-53); }

namespace {

void check_patch(const CnnConfig& config, std::size_t length) {
    const auto expected = static_cast<std::size_t>(config.input_size) * config.input_size;
    if (length != expected) {
        std::ostringstream msg;
        msg << "patch has " << length << " values, model expects " << expected;
        throw ShapeMismatch(msg.str());
    }
}

}  // namespace

namespace detail {

void correlate_valid(std::span<const double> plane, int width, int height,
                     std::span<const double> kernel, int kernel_size, std::span<double> out) {
    const int out_w = width - kernel_size + 1;
    const int out_h = height - kernel_size + 1;
    std::fill(out.begin(), out.end(), 0.0);
    for (int ky = 0; ky < kernel_size; ++ky) {
        for (int kx = 0; kx < kernel_size; ++kx) {
            const double w = kernel[static_cast<std::size_t>(ky) * kernel_size + kx];
            for (int oy = 0; oy < out_h; ++oy) {
                const double* src = plane.data() + static_cast<std::size_t>(oy + ky) * width + kx;
                double* dst = out.data() + static_cast<std::size_t>(oy) * out_w;
                for (int ox = 0; ox < out_w; ++ox) dst[ox] += w * src[ox];
            }
        }
    }
}

void average_pool(const double* map, int stride, const CnnConfig& config, double* pooled) {
    const int side = config.pooled_side();
    const int window = config.pool_window;
    const double area = static_cast<double>(window) * window;
    for (int py = 0; py < side; ++py) {
        for (int px = 0; px < side; ++px) {
            const double* origin = map + static_cast<std::ptrdiff_t>(py * config.pool_stride) * stride +
                                   px * config.pool_stride;
            double sum = 0.0;
            for (int r = 0; r < window; ++r)
                for (int c = 0; c < window; ++c) sum += origin[static_cast<std::ptrdiff_t>(r) * stride + c];
            pooled[py * side + px] = sum / area;
        }
    }
}

double dense_head(const CnnModel& model, std::span<const double> pooled, std::span<double> hidden) {
    const auto& w = model.weights;
    const std::size_t inputs = pooled.size();
    double logit = w.out_bias[0];
    for (std::size_t p = 0; p < hidden.size(); ++p) {
        const double* row = w.fc_weights.data() + p * inputs;
        double z = w.fc_biases[p];
        for (std::size_t i = 0; i < inputs; ++i) z += row[i] * pooled[i];
        hidden[p] = logistic(z);
    }
    for (std::size_t p = 0; p < hidden.size(); ++p) logit += w.out_weights[p] * hidden[p];
    return logit;
}

}  // namespace detail

double forward(const CnnModel& model, std::span<const double> patch, Activations& acts) {
    const CnnConfig& cfg = model.config;
    check_patch(cfg, patch.size());
    const int n = cfg.input_size;
    const int k = cfg.kernel_size;
    const auto cs2 = static_cast<std::size_t>(cfg.conv_side()) * cfg.conv_side();
    const auto ps2 = static_cast<std::size_t>(cfg.pooled_side()) * cfg.pooled_side();
    const auto k2 = static_cast<std::size_t>(k) * k;

    acts.conv.resize(cfg.num_filters * cs2);
    acts.pooled.resize(cfg.num_filters * ps2);
    acts.hidden.resize(static_cast<std::size_t>(cfg.num_perceptrons));

    for (int f = 0; f < cfg.num_filters; ++f) {
        std::span<double> map(acts.conv.data() + f * cs2, cs2);
        detail::correlate_valid(patch, n, n, std::span(model.weights.conv_kernels).subspan(f * k2, k2), k, map);
        const double bias = model.weights.conv_biases[static_cast<std::size_t>(f)];
        for (double& v : map) v = logistic(v + bias);
        detail::average_pool(map.data(), cfg.conv_side(), cfg, acts.pooled.data() + f * ps2);
    }
    acts.logit = detail::dense_head(model, acts.pooled, acts.hidden);
    acts.rating = rating_from_logit(acts.logit);
    return acts.rating;
}

double forward(const CnnModel& model, std::span<const double> patch) {
    Activations acts;
    return forward(model, patch, acts);
}

// --- initialization -------------------------------------------------------------

CnnModel init_model(const CnnConfig& config, std::uint64_t seed) {
    CnnModel model{config, Parameters::zeros(config)};
    Rng rng(seed);
    const auto fill_uniform = [&rng](std::span<double> values, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : values) v = rng.uniform(-limit, limit);
    };
    const double k2 = static_cast<double>(config.kernel_size) * config.kernel_size;
    fill_uniform(model.weights.conv_kernels, k2, config.num_filters * k2);
    fill_uniform(model.weights.fc_weights, config.fc_inputs(), config.num_perceptrons);
    fill_uniform(model.weights.out_weights, config.num_perceptrons, 1.0);
    return model;
}

// --- backpropagation -------------------------------------------------------------

namespace {

struct Workspace {
    Activations acts;
    std::vector<double> d_hidden;
    std::vector<double> d_pooled;
    std::vector<double> d_conv;
    Gradients grads;
};

// Writes the gradient of one sample into ws.grads and returns its loss.
double backprop(const CnnModel& model, const TrainingSample& sample, Workspace& ws) {
    const CnnConfig& cfg = model.config;
    const double rating = forward(model, sample.patch, ws.acts);
    const double target = sample.target;
    const double loss = 0.5 * (rating - target) * (rating - target);

    const int n = cfg.input_size;
    const int k = cfg.kernel_size;
    const int cs = cfg.conv_side();
    const int ps = cfg.pooled_side();
    const auto k2 = static_cast<std::size_t>(k) * k;
    const auto cs2 = static_cast<std::size_t>(cs) * cs;
    const auto ps2 = static_cast<std::size_t>(ps) * ps;
    const std::size_t inputs = ws.acts.pooled.size();
    const auto perceptrons = static_cast<std::size_t>(cfg.num_perceptrons);

    if (!ws.grads.same_shape(model.weights)) ws.grads = Parameters::zeros(cfg);
    Gradients& g = ws.grads;
    g.fill(0.0);

    // output perceptron
    const double d_out = (rating - target) * rating * (1.0 - rating);
    g.out_bias[0] = d_out;
    ws.d_hidden.resize(perceptrons);
    for (std::size_t p = 0; p < perceptrons; ++p) {
        const double h = ws.acts.hidden[p];
        g.out_weights[p] = d_out * h;
        ws.d_hidden[p] = d_out * model.weights.out_weights[p] * h * (1.0 - h);
    }

    // fully connected layer
    ws.d_pooled.assign(inputs, 0.0);
    for (std::size_t p = 0; p < perceptrons; ++p) {
        const double dz = ws.d_hidden[p];
        g.fc_biases[p] = dz;
        const double* w_row = model.weights.fc_weights.data() + p * inputs;
        double* g_row = g.fc_weights.data() + p * inputs;
        for (std::size_t i = 0; i < inputs; ++i) {
            g_row[i] = dz * ws.acts.pooled[i];
            ws.d_pooled[i] += dz * w_row[i];
        }
    }

    // average pool -> conv activations -> conv pre-activations
    ws.d_conv.resize(cfg.num_filters * cs2);
    const double area = static_cast<double>(cfg.pool_window) * cfg.pool_window;
    for (int f = 0; f < cfg.num_filters; ++f) {
        double* d_map = ws.d_conv.data() + f * cs2;
        std::fill(d_map, d_map + cs2, 0.0);
        const double* d_pool = ws.d_pooled.data() + f * ps2;
        for (int py = 0; py < ps; ++py) {
            for (int px = 0; px < ps; ++px) {
                const double share = d_pool[py * ps + px] / area;
                for (int r = 0; r < cfg.pool_window; ++r) {
                    double* row = d_map + static_cast<std::size_t>(py * cfg.pool_stride + r) * cs +
                                  px * cfg.pool_stride;
                    for (int c = 0; c < cfg.pool_window; ++c) row[c] += share;
                }
            }
        }
        const double* act = ws.acts.conv.data() + f * cs2;
        double bias_grad = 0.0;
        for (std::size_t i = 0; i < cs2; ++i) {
            d_map[i] *= act[i] * (1.0 - act[i]);
            bias_grad += d_map[i];
        }
        g.conv_biases[static_cast<std::size_t>(f)] = bias_grad;

        double* g_kernel = g.conv_kernels.data() + f * k2;
        for (int oy = 0; oy < cs; ++oy) {
            for (int ox = 0; ox < cs; ++ox) {
                const double d = d_map[static_cast<std::size_t>(oy) * cs + ox];
                if (d == 0.0) continue;
                for (int ky = 0; ky < k; ++ky) {
                    const double* src = sample.patch.data() + static_cast<std::size_t>(oy + ky) * n + ox;
                    double* dst = g_kernel + static_cast<std::size_t>(ky) * k;
                    for (int kx = 0; kx < k; ++kx) dst[kx] += d * src[kx];
                }
            }
        }
    }
    return loss;
}

void check_sample(const CnnConfig& config, const TrainingSample& sample) {
    check_patch(config, sample.patch.size());
    if (sample.target != 0 && sample.target != 1)
        throw std::invalid_argument("training target must be 0 or 1");
}

}  // namespace

LossAndGradients compute_gradients(const CnnModel& model, const TrainingSample& sample) {
    check_sample(model.config, sample);
    Workspace ws;
    const double loss = backprop(model, sample, ws);
    return {loss, std::move(ws.grads)};
}

// --- finite differences ------------------------------------------------------------

namespace {

// logistic(y + d) - logistic(y), accurate to a few ulps of the difference itself.
double logistic_step(double y, double d) {
    const double m = std::expm1(d);
    if (y >= 0.0) {
        const double e = std::exp(-y);
        return m * e / ((1.0 + e) * (e + 1.0 + m));
    }
    const double e = std::exp(y);
    return m * e / ((1.0 + e) * (1.0 + e * (1.0 + m)));
}

}  // namespace

// Each probe evaluates the network at theta - eps along one parameter and
// carries the difference to theta + eps through every layer alongside it,
// so L(+) - L(-) is never formed by subtracting two nearly equal losses.
Gradients numeric_gradients(const CnnModel& model, const TrainingSample& sample, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("gradient check epsilon must be > 0");
    check_sample(model.config, sample);
    const CnnConfig& cfg = model.config;
    const Parameters& w = model.weights;
    const int n = cfg.input_size;
    const int k = cfg.kernel_size;
    const int cs = cfg.conv_side();
    const auto k2 = static_cast<std::size_t>(k) * k;
    const auto cs2 = static_cast<std::size_t>(cs) * cs;
    const auto ps2 = static_cast<std::size_t>(cfg.pooled_side()) * cfg.pooled_side();
    const auto inputs = static_cast<std::size_t>(cfg.fc_inputs());
    const auto perceptrons = static_cast<std::size_t>(cfg.num_perceptrons);
    const double target = sample.target;
    const double step = 2.0 * epsilon;

    // unperturbed network
    std::vector<double> pre(cfg.num_filters * cs2);
    std::vector<double> pooled(cfg.num_filters * ps2);
    std::vector<double> act(cs2);
    for (int f = 0; f < cfg.num_filters; ++f) {
        std::span<double> map(pre.data() + f * cs2, cs2);
        detail::correlate_valid(sample.patch, n, n, std::span(w.conv_kernels).subspan(f * k2, k2), k, map);
        for (double& v : map) v += w.conv_biases[static_cast<std::size_t>(f)];
        for (std::size_t i = 0; i < cs2; ++i) act[i] = logistic(map[i]);
        detail::average_pool(act.data(), cs, cfg, pooled.data() + f * ps2);
    }
    std::vector<double> z(perceptrons);
    std::vector<double> hidden(perceptrons);
    double logit = w.out_bias[0];
    for (std::size_t p = 0; p < perceptrons; ++p) {
        const double* row = w.fc_weights.data() + p * inputs;
        z[p] = w.fc_biases[p];
        for (std::size_t i = 0; i < inputs; ++i) z[p] += row[i] * pooled[i];
        hidden[p] = logistic(z[p]);
        logit += w.out_weights[p] * hidden[p];
    }

    const auto loss_step = [&](double logit_lo, double d_logit) {
        const double r = logistic(logit_lo);
        const double dr = logistic_step(logit_lo, d_logit);
        return 0.5 * dr * (2.0 * (r - target) + dr);
    };
    // only perceptron p changes
    const auto hidden_step = [&](std::size_t p, double z_lo, double d_z) {
        const double logit_lo = logit + w.out_weights[p] * (logistic(z_lo) - hidden[p]);
        return loss_step(logit_lo, w.out_weights[p] * logistic_step(z_lo, d_z));
    };
    // only filter f changes; its pre-activation at map position i moves by eps * slope(i)
    std::vector<double> act_lo(cs2), d_act(cs2), pooled_lo(ps2), d_pooled(ps2);
    const auto filter_step = [&](int f, const auto& slope) {
        const double* base = pre.data() + f * cs2;
        for (std::size_t i = 0; i < cs2; ++i) {
            const double s = slope(i);
            const double lo = base[i] - epsilon * s;
            act_lo[i] = logistic(lo);
            d_act[i] = logistic_step(lo, step * s);
        }
        detail::average_pool(act_lo.data(), cs, cfg, pooled_lo.data());
        detail::average_pool(d_act.data(), cs, cfg, d_pooled.data());
        const double* pooled_f = pooled.data() + f * ps2;
        double logit_lo = w.out_bias[0];
        double d_logit = 0.0;
        for (std::size_t p = 0; p < perceptrons; ++p) {
            const double* row = w.fc_weights.data() + p * inputs + f * ps2;
            double dz_lo = 0.0;
            double dz = 0.0;
            for (std::size_t j = 0; j < ps2; ++j) {
                dz_lo += row[j] * (pooled_lo[j] - pooled_f[j]);
                dz += row[j] * d_pooled[j];
            }
            const double z_lo = z[p] + dz_lo;
            logit_lo += w.out_weights[p] * logistic(z_lo);
            d_logit += w.out_weights[p] * logistic_step(z_lo, dz);
        }
        return loss_step(logit_lo, d_logit);
    };

    Gradients numeric = Parameters::zeros(cfg);
    for (int f = 0; f < cfg.num_filters; ++f) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const auto input_at = [&](std::size_t i) {
                    const auto oy = static_cast<int>(i) / cs;
                    const auto ox = static_cast<int>(i) % cs;
                    return sample.patch[static_cast<std::size_t>(oy + ky) * n + ox + kx];
                };
                numeric.conv_kernels[f * k2 + static_cast<std::size_t>(ky) * k + kx] = filter_step(f, input_at) / step;
            }
        }
        numeric.conv_biases[static_cast<std::size_t>(f)] = filter_step(f, [](std::size_t) { return 1.0; }) / step;
    }
    for (std::size_t p = 0; p < perceptrons; ++p) {
        for (std::size_t i = 0; i < inputs; ++i)
            numeric.fc_weights[p * inputs + i] = hidden_step(p, z[p] - epsilon * pooled[i], step * pooled[i]) / step;
        numeric.fc_biases[p] = hidden_step(p, z[p] - epsilon, step) / step;
        numeric.out_weights[p] = loss_step(logit - epsilon * hidden[p], step * hidden[p]) / step;
    }
    numeric.out_bias[0] = loss_step(logit - epsilon, step) / step;
    return numeric;
}

double max_relative_error(const CnnModel& model, const TrainingSample& sample,
                          const Gradients& analytic, double epsilon) {
    if (!analytic.same_shape(model.weights)) throw ShapeMismatch("gradient shape does not match model");
    const Gradients numeric = numeric_gradients(model, sample, epsilon);
    double worst = 0.0;
    for (Layer l : kAllLayers) {
        const auto a = analytic.layer(l);
        const auto b = numeric.layer(l);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-12});
            worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
        }
    }
    return worst;
}

double gradient_check(const CnnModel& model, const TrainingSample& sample, double epsilon) {
    return max_relative_error(model, sample, compute_gradients(model, sample).grads, epsilon);
}

// --- training -----------------------------------------------------------------------

double train_step(CnnModel& model, std::span<const TrainingSample* const> batch,
                  double learning_rate, std::size_t workers) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    const std::size_t chunks = (batch.size() + kGradientChunk - 1) / kGradientChunk;
    std::vector<Gradients> chunk_sums(chunks, Parameters::zeros(model.config));
    std::vector<double> chunk_losses(chunks, 0.0);

    parallel_for(chunks, workers, [&](std::size_t begin, std::size_t end) {
        Workspace ws;
        for (std::size_t c = begin; c < end; ++c) {
            const std::size_t first = c * kGradientChunk;
            const std::size_t last = std::min(batch.size(), first + kGradientChunk);
            for (std::size_t s = first; s < last; ++s) {
                chunk_losses[c] += backprop(model, *batch[s], ws);
                chunk_sums[c].add_scaled(ws.grads, 1.0);
            }
        }
    });

    Gradients total = std::move(chunk_sums[0]);
    double loss = chunk_losses[0];
    for (std::size_t c = 1; c < chunks; ++c) {
        total.add_scaled(chunk_sums[c], 1.0);
        loss += chunk_losses[c];
    }
    const auto count = static_cast<double>(batch.size());
    for (Layer l : kAllLayers) {
        auto w = model.weights.layer(l);
        const auto g = total.layer(l);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * (g[i] / count);
    }
    if (!model.weights.all_finite())
        throw std::runtime_error("training diverged: non-finite weight after update");
    return loss / count;
}

TrainResult train(CnnModel model, std::span<const TrainingSample> samples, const TrainOptions& options) {
    if (samples.empty()) throw std::invalid_argument("train: empty sample set");
    if (options.epochs < 1 || options.batch_size < 1)
        throw std::invalid_argument("train: epochs and batch size must be >= 1");
    model.validate();
    for (const auto& s : samples) check_sample(model.config, s);

    Rng rng(options.seed);
    std::vector<const TrainingSample*> order(samples.size());
    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(options.epochs));
    const auto batch = static_cast<std::size_t>(options.batch_size);

    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        for (std::size_t i = 0; i < samples.size(); ++i) order[i] = &samples[i];
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t len = std::min(batch, order.size() - start);
            const std::span<const TrainingSample* const> slice(order.data() + start, len);
            loss_sum += train_step(model, slice, options.learning_rate, options.workers) * static_cast<double>(len);
        }
        const double mean_loss = loss_sum / static_cast<double>(samples.size());
        result.loss_history.push_back(mean_loss);
        if (options.on_epoch) options.on_epoch(epoch, mean_loss);
    }
    result.model = std::move(model);
    return result;
}

}  // namespace pupilnet
