#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kprnn/pose_model.hpp"

namespace kprnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Layer sizes of a KP-RNN.
struct NetworkDims {
    std::size_t input = kPoseDims;
    std::size_t lstm_size = 64;
    std::size_t lstm_layers = 2;
    std::size_t dense_size = 64;
    std::size_t dense_layers = 1;
    std::size_t output = kPoseDims;

    /// Throws UsageError on zero sizes or zero LSTM layers.
    void validate() const;

    friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

/// Gate blocks are stacked in the order (input, forget, candidate, output); each block has lstm_size rows.
struct LstmLayer {
    Matrix input_weights;      // 4H x in
    Matrix recurrent_weights;  // 4H x H
    Vector bias;               // 4H
};

struct DenseLayer {
    Matrix weights;  // out x in
    Vector bias;     // out
};

/// Every tensor of a network. `dense` holds the hidden layers followed by the output layer.
template <typename Tag>
struct TensorSet {
    std::vector<LstmLayer> lstm;
    std::vector<DenseLayer> dense;

    static TensorSet zeros(const NetworkDims& dims);

    [[nodiscard]] NetworkDims dims() const;
    [[nodiscard]] std::size_t parameter_count() const;

    /// Storage views in canonical order: per LSTM layer (W, U, b), then per dense layer (weights, bias).
    std::vector<std::span<double>> tensors();
    [[nodiscard]] std::vector<std::span<const double>> tensors() const;

    /// Names matching tensors(), e.g. "lstm0.W", "dense1.bias".
    [[nodiscard]] std::vector<std::string> tensor_names() const;

    [[nodiscard]] bool all_finite() const;
};

struct ParamsTag {};
struct GradientsTag {};
using NetworkParams = TensorSet<ParamsTag>;
using Gradients = TensorSet<GradientsTag>;

struct InitOptions {
    double forget_bias = 1.0;
};

/// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out)) per matrix), zero biases except the
/// LSTM forget-gate block. Deterministic in `seed`.
NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed, const InitOptions& options = {});

/// Hidden and cell vectors of one LSTM layer.
struct CellState {
    Vector h;
    Vector c;
};
using LstmState = std::vector<CellState>;

/// One step of a standard LSTM cell.
CellState lstm_cell(const Vector& x, const CellState& prev, const LstmLayer& layer);

/// A batch of equally long windows. Column t*batch + b of `inputs` holds step t of window b.
struct SequenceBatch {
    std::size_t steps = 0;
    std::size_t batch = 0;
    Matrix inputs;

    static SequenceBatch from_window(std::span<const Vector> window);
    static SequenceBatch from_window(std::span<const PoseVector> window);
    /// All windows must share one length.
    static SequenceBatch from_windows(const std::vector<std::span<const PoseVector>>& windows);
};

/// Inverted-dropout masks: entries are 0 or 1/(1-rate).
struct DropoutMasks {
    double rate = 0.0;
    std::vector<Matrix> lstm;   // per LSTM layer, H x (steps*batch)
    std::vector<Matrix> dense;  // per dense hidden layer, D x batch
};

/// Throws UsageError unless 0 <= rate < 1.
DropoutMasks sample_dropout(const NetworkDims& dims, std::size_t steps, std::size_t batch, double rate, Rng& rng);

/// Intermediate values a backward pass needs.
struct ForwardCache {
    struct LstmTrace {
        Matrix inputs;  // in x (steps*batch), already masked by the layer below
        Matrix gates;   // 4H x (steps*batch), post-activation
        Matrix cells;   // H x (steps*batch)
        Matrix hidden;  // H x (steps*batch), before dropout
    };
    struct DenseTrace {
        Matrix inputs;      // in x batch
        Matrix activation;  // out x batch, before dropout
    };

    std::size_t steps = 0;
    std::size_t batch = 0;
    std::vector<LstmTrace> lstm;
    std::vector<DenseTrace> dense;  // hidden layers then output layer
    std::optional<DropoutMasks> masks;

    /// Output layer activation, output x batch; every entry in (0,1).
    [[nodiscard]] const Matrix& output() const { return dense.back().activation; }
};

/// Runs every LSTM layer across the window from zero state, then the dense stack on the final
/// top-layer hidden vector. Sigmoid on dense hidden and output layers.
ForwardCache forward(const SequenceBatch& batch, const NetworkParams& params, std::optional<DropoutMasks> masks = {});
/// Same, reusing the storage already held by `cache`.
void forward(const SequenceBatch& batch, const NetworkParams& params, std::optional<DropoutMasks> masks,
             ForwardCache& cache);

/// Mean over unmasked elements of the squared error. Throws UsageError on an all-zero mask.
double mse_loss(std::span<const double> pred, std::span<const double> target,
                std::optional<std::span<const double>> mask = {});

/// Exact gradient of the sum over batch columns of mse_loss, through the full window.
/// `targets` and `mask` are output x batch.
Gradients backward(const ForwardCache& cache, const NetworkParams& params, const Matrix& targets,
                   const Matrix* mask = nullptr);

struct BackwardScratch {
    Matrix dY;
    Matrix dZ;
};

/// Same, writing into `grads` (shaped like params, e.g. from Gradients::zeros) and reusing `scratch`.
void backward(const ForwardCache& cache, const NetworkParams& params, const Matrix& targets, const Matrix* mask,
              Gradients& grads, BackwardScratch& scratch);

/// Dropout-free forward on one window.
Vector predict(std::span<const Vector> window, const NetworkParams& params);
PoseVector predict_next(std::span<const PoseVector> window, const NetworkParams& params);

/// Autoregressive rollout: each prediction slides into the fixed-length window.
std::vector<PoseVector> generate(std::span<const PoseVector> seed_window, std::size_t horizon,
                                 const NetworkParams& params);

/// Uniform double in [0,1) from the top 53 bits of one draw.
double uniform01(Rng& rng);

}  // namespace kprnn
