#pragma once

#include <cstddef>

#include "kprnn/pose_model.hpp"

namespace kprnn {

struct NormalizeResult {
    PoseSequence sequence;
    /// Number of coordinates that fell outside the frame and were clamped.
    std::size_t clamped = 0;
};

/// Maps raw pixels to the unit square: x/width, y/height. Missing joints stay (0,0,0).
NormalizeResult normalize(const PoseSequence& seq);

/// Inverse of normalize for the given footage dimensions.
PoseSequence denormalize(const PoseSequence& seq, double width, double height);

}  // namespace kprnn
