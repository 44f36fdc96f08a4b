#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kprnn/openpose_ingest.hpp"
#include "kprnn/pose_model.hpp"

namespace kprnn {

struct SelectionRule {
    enum class Kind { highest_confidence, index_k };
    Kind kind = Kind::highest_confidence;
    std::size_t k = 0;

    /// Accepts "highest_confidence" or "index:K".
    static SelectionRule parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
};

struct TrackerConfig {
    /// Largest accepted centroid displacement between consecutive frames, as a fraction of the frame diagonal.
    double max_jump = 0.2;
    SelectionRule selection_rule;
};

struct TrackReport {
    std::size_t chosen_initial_index = 0;
    std::vector<std::int64_t> carried_frames;
    std::size_t total_frames = 0;
};

struct TrackResult {
    PoseSequence sequence;
    TrackReport report;
};

/// Mean distance over joints present in both poses; +inf when none are shared.
double pose_distance(const PoseFrame& a, const PoseFrame& b);

/// Mean confidence over non-missing joints (0 for an empty detection).
double mean_confidence(const PoseFrame& pose);

/// Greedy nearest-pose tracking with carry-forward. Output is raw pixel space with one
/// frame per input frame. Frames preceding the first detection are back-filled with the
/// anchor pose and reported as carried.
TrackResult select_person(const std::vector<MultiPersonFrame>& frames, const TrackerConfig& cfg, double width,
                          double height);

}  // namespace kprnn
