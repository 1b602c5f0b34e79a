#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pupilnet {

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Architecture of one conv -> average pool -> fully connected -> logistic
/// output network. "KnPk" names map to num_filters = n, num_perceptrons = k.
struct CnnConfig {
    int input_size = 0;
    int kernel_size = 0;
    int conv_stride = 1;
    int num_filters = 0;
    int pool_window = 0;
    int pool_stride = 0;
    int num_perceptrons = 0;

    int conv_side() const { return input_size - kernel_size + 1; }
    int pooled_side() const;
    int fc_inputs() const { return num_filters * pooled_side() * pooled_side(); }

    /// Throws InvalidConfig when any count is non-positive, the stride is not
    /// one, or a derived layer side is below one.
    void validate() const;

    bool operator==(const CnnConfig&) const = default;
};

enum class Layer { ConvKernels, ConvBiases, FcWeights, FcBiases, OutWeights, OutBias };

inline constexpr std::array<Layer, 6> kAllLayers = {Layer::ConvKernels, Layer::ConvBiases,
                                                    Layer::FcWeights,   Layer::FcBiases,
                                                    Layer::OutWeights,  Layer::OutBias};

std::string layer_name(Layer layer);

/// Every trainable scalar of a network, grouped by layer.
///
/// conv_kernels: filter-major, then row-major within a kernel.
/// fc_weights:   perceptron-major; within a perceptron the inputs are the
///               pooled maps in filter-major, row-major order.
/// out_bias holds exactly one value.
struct Parameters {
    std::vector<double> conv_kernels;
    std::vector<double> conv_biases;
    std::vector<double> fc_weights;
    std::vector<double> fc_biases;
    std::vector<double> out_weights;
    std::vector<double> out_bias;

    static Parameters zeros(const CnnConfig& config);

    std::span<double> layer(Layer which);
    std::span<const double> layer(Layer which) const;
    std::size_t size() const;
    bool same_shape(const Parameters& other) const;
    bool all_finite() const;

    void fill(double value);
    /// this += scale * other
    void add_scaled(const Parameters& other, double scale);

    bool operator==(const Parameters&) const = default;
};

/// Partial derivatives of the loss, shaped exactly like the model weights.
using Gradients = Parameters;

struct CnnModel {
    CnnConfig config;
    Parameters weights;

    /// Throws ShapeMismatch if any layer's length disagrees with the config,
    /// std::domain_error if any weight is NaN or infinite.
    void validate() const;

    bool operator==(const CnnModel&) const = default;
};

struct TrainingSample {
    std::vector<double> patch;  // input_size^2 intensities, row-major
    int target = 0;             // 1 = valid pupil center, 0 = invalid
};

/// Intermediate values of one forward pass.
struct Activations {
    std::vector<double> conv;    // num_filters x conv_side^2, after the logistic
    std::vector<double> pooled;  // num_filters x pooled_side^2
    std::vector<double> hidden;  // num_perceptrons
    double logit = 0.0;          // output pre-activation
    double rating = 0.0;
};

double logistic(double z);

/// Output rating for a logit, kept inside the open interval (0, 1) even where
/// the logistic saturates in double precision.
double rating_from_logit(double logit);

/// Uniform fan-based initialization, biases zero. Deterministic in `seed`.
CnnModel init_model(const CnnConfig& config, std::uint64_t seed);

/// Rating in (0, 1) for one input_size x input_size patch.
double forward(const CnnModel& model, std::span<const double> patch);
double forward(const CnnModel& model, std::span<const double> patch, Activations& acts);

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

/// Squared-error loss 0.5 * (rating - target)^2 and its exact gradient by
/// backpropagation.
LossAndGradients compute_gradients(const CnnModel& model, const TrainingSample& sample);

/// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12)
/// where numeric is the central difference with step `epsilon`.
double gradient_check(const CnnModel& model, const TrainingSample& sample, double epsilon);

/// Same comparison against caller-supplied analytic gradients.
double max_relative_error(const CnnModel& model, const TrainingSample& sample,
                          const Gradients& analytic, double epsilon);

/// Central-difference gradient of the loss, computed only from forward
/// evaluations of perturbed networks. The two perturbed networks are
/// evaluated side by side, value and difference, so components far below the
/// rounding level of the loss itself are still resolved.
Gradients numeric_gradients(const CnnModel& model, const TrainingSample& sample, double epsilon);

struct TrainOptions {
    int epochs = 10;
    int batch_size = 500;
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    /// Called after each epoch with (1-based epoch, mean loss).
    std::function<void(int, double)> on_epoch;
};

struct TrainResult {
    CnnModel model;
    std::vector<double> loss_history;  // mean per-sample loss of each epoch
};

/// Batch gradient descent: w <- w - lr * mean batch gradient.
///
/// Samples are reshuffled every epoch from the seed. Within a batch the
/// per-sample gradients are summed in fixed chunks of kGradientChunk samples
/// and the chunk sums are added in order, so the result does not depend on
/// the worker count.
TrainResult train(CnnModel model, std::span<const TrainingSample> samples, const TrainOptions& options);

inline constexpr std::size_t kGradientChunk = 16;

/// Applies one batch update; exposed for tests. Returns the batch mean loss.
double train_step(CnnModel& model, std::span<const TrainingSample* const> batch,
                  double learning_rate, std::size_t workers = 1);

namespace detail {

/// Valid-mode cross-correlation of one kernel over a (width x height) plane,
/// writing (width-k+1) x (height-k+1) pre-activations without bias:
/// each output is the sum over kernel rows, then columns, in row-major order.
void correlate_valid(std::span<const double> plane, int width, int height,
                     std::span<const double> kernel, int kernel_size, std::span<double> out);

/// Average-pools one activation map addressed with row stride `stride`,
/// whose pooled result has side pooled_side.
void average_pool(const double* map, int stride, const CnnConfig& config, double* pooled);

/// Fully connected + output layers from pooled features. Fills `hidden`
/// (num_perceptrons) and returns the output logit.
double dense_head(const CnnModel& model, std::span<const double> pooled, std::span<double> hidden);

}  // namespace detail

}  // namespace pupilnet
