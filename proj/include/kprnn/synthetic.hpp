#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "kprnn/openpose_ingest.hpp"
#include "kprnn/pose_model.hpp"

namespace kprnn::synthetic {

/// Smooth periodic "dance" motion in normalized coordinates.
///
/// Every sequence animates one shared standing BODY_25 skeleton. Joint j moves as
///   x_j(t) = base_x_j + dx + s * amp_j * cos(2*pi*t/P + phi + psi_j)
///   y_j(t) = base_y_j + dy + s * amp_j * sin(2*pi*t/P + phi + psi_j) * 0.5
/// where amp_j and psi_j are per-joint and shared by all sequences (drawn once from the seed),
/// and each sequence draws its own body offset (dx, dy), amplitude scale s, period P and
/// phase phi. All joints are visible with confidence 1.
struct DanceOptions {
    std::size_t sequences = 10;
    std::size_t frames = 300;
    double min_period = 24.0;
    double max_period = 48.0;
    double width = 1280.0;
    double height = 720.0;
    std::uint64_t seed = 1;
};

std::vector<PoseSequence> dance_sequences(const DanceOptions& options);

/// Two people walking slowly on opposite halves of the frame, listed in random order per frame.
/// Person 0 ("left") is detected with higher confidence than person 1 ("right").
struct SceneOptions {
    std::size_t frames = 120;
    double width = 1280.0;
    double height = 720.0;
    /// Frame positions (0-based) that contain nobody.
    std::vector<std::size_t> empty_frames;
    std::uint64_t seed = 1;
};

struct Scene {
    std::vector<MultiPersonFrame> frames;
    /// Index of the left person inside frames[i].people, or nullopt for empty frames.
    std::vector<std::optional<std::size_t>> left_index;
    double width = 0.0;
    double height = 0.0;
};

Scene two_person_scene(const SceneOptions& options);

/// Random valid frame (raw pixels within width x height, about 10% of joints missing).
PoseFrame random_frame(std::uint64_t seed, double width, double height, std::int64_t frame_index);

}  // namespace kprnn::synthetic
