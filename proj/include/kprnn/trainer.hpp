#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kprnn/evaluator.hpp"
#include "kprnn/kp_rnn.hpp"
#include "kprnn/pose_model.hpp"

namespace kprnn {

/// Training configuration. The first group is the reference architecture and optimizer; the rest are
/// choices this implementation makes.
struct Hyperparameters {
    std::size_t lstm_layers = 2;
    std::size_t lstm_size = 64;
    std::size_t dense_hidden_layers = 1;
    std::size_t dense_hidden_size = 64;
    double dropout = 0.3;
    double lr_start = 3e-3;
    double lr_end = 1e-3;
    double momentum = 0.2;
    std::size_t max_epochs = 1200;
    std::string loss = "mse";

    std::size_t window_length = 32;
    std::size_t batch_size = 32;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;
    bool mask_missing = false;
    std::optional<std::size_t> early_stop_patience;
    double forget_bias = 1.0;

    /// Throws UsageError when an invariant is violated.
    void validate() const;
    [[nodiscard]] NetworkDims dims() const;

    [[nodiscard]] nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static Hyperparameters from_json(const nlohmann::json& j);

    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// Learning rate at `epoch`, decaying linearly from lr_start (epoch 0) to lr_end (epoch max_epochs-1).
double learning_rate(const Hyperparameters& hyper, std::size_t epoch);

struct TrainingPair {
    std::vector<PoseVector> window;
    PoseVector target;
    /// 0 for coordinates of joints missing in the target frame.
    PoseMask mask{};
    std::size_t sequence = 0;
    std::int64_t target_frame = 0;
};

/// Every contiguous window paired with the frame right after it. Windows never cross sequence
/// boundaries; sequences no longer than the window are skipped.
std::vector<TrainingPair> make_windows(const std::vector<PoseSequence>& seqs, std::size_t window_length);

struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

/// Splits by source sequence (seeded shuffle of sequence ids). With a single source sequence
/// the last val_fraction of its pairs, in time order, become validation.
DataSplit split_pairs(std::span<const TrainingPair> pairs, double val_fraction, std::uint64_t seed);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NetworkParams params;
    Hyperparameters hyper;
    std::size_t epoch = 0;
    std::string rng_state;
    double width = 0.0;
    double height = 0.0;
    std::uint32_t format_version = kCheckpointVersion;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainingRecord> records;
};

struct TrainOptions {
    /// Footage geometry stored in the checkpoint.
    double width = 1.0;
    double height = 1.0;
    std::function<void(const TrainingRecord&)> on_epoch;
};

/// v = momentum*v - lr*g; p += v, element by element.
void momentum_update(std::span<double> params, std::span<double> velocity, std::span<const double> grads, double lr,
                     double momentum);

/// Minibatch SGD with momentum. Gradients within a batch are summed in a fixed order.
/// Throws NumericalError on a non-finite loss.
TrainResult train(std::span<const TrainingPair> pairs, const Hyperparameters& hyper, const TrainOptions& options = {});

/// Dropout-free predictions for the given pairs, computed in fixed-size chunks.
std::vector<PoseVector> predict_pairs(const NetworkParams& params, std::span<const TrainingPair> pairs,
                                      std::span<const std::size_t> indices);

/// RMSE of the model over the selected pairs, honoring masks when `use_masks`.
double evaluate_rmse(const NetworkParams& params, std::span<const TrainingPair> pairs,
                     std::span<const std::size_t> indices, bool use_masks);

/// RMSE of predicting each target as the last frame of its window.
double persistence_rmse(std::span<const TrainingPair> pairs, std::span<const std::size_t> indices, bool use_masks);

// Layout (all integers little-endian):
//   "KPRN" | u32 format_version | u32 dim_count | dim_count x u32 dims
//   | u64 json_length | metadata JSON (UTF-8) | u64 value_count
//   | value_count x f64 tensors | u32 CRC-32 of every preceding byte
// dims = input, lstm_size, lstm_layers, dense_size, dense_layers, output.
// Tensors: per LSTM layer W, U, b; per dense layer weights, bias; matrices row-major.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kprnn
