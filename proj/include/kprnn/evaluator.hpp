#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "kprnn/pose_model.hpp"

namespace kprnn {

/// 1 where a coordinate takes part in the error, 0 where it is excluded.
using PoseMask = std::array<double, kPoseDims>;

/// Root of the mean squared error over every unmasked coordinate of every pair.
/// Units follow the coordinate space of the inputs (normalized by default).
double rmse(std::span<const PoseVector> preds, std::span<const PoseVector> targets,
            std::span<const PoseMask> masks = {});

/// RMSE restricted to each joint's (x,y) pair, over all frames.
std::array<double, kJointCount> per_keypoint_rmse(std::span<const PoseVector> preds,
                                                  std::span<const PoseVector> targets);

/// RMSE of predicting frame t as frame t-1, over every frame eligible as a training target
/// for the given window length. `seq` must be normalized.
double persistence_baseline(const PoseSequence& seq, std::size_t window_length);

struct TrainingRecord {
    std::size_t epoch = 0;
    double train_rmse = 0.0;
    double val_rmse = 0.0;
    double lr = 0.0;

    friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

/// CSV with header `epoch,train_rmse,val_rmse,lr`; values round-trip exactly.
void export_curve(std::span<const TrainingRecord> records, const std::filesystem::path& path);
std::vector<TrainingRecord> read_curve(const std::filesystem::path& path);

}  // namespace kprnn
