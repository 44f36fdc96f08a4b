#include "kprnn/normalizer.hpp"

#include <algorithm>
#include <vector>

#include "kprnn/error.hpp"

namespace kprnn {

namespace {

double clamp_unit(double v, std::size_t& clamped)
{
    if (v < 0.0 || v > 1.0) {
        ++clamped;
        return std::clamp(v, 0.0, 1.0);
    }
    return v;
}

}  // namespace

NormalizeResult normalize(const PoseSequence& seq)
{
    if (seq.space() != CoordinateSpace::raw_pixels)
        throw UsageError("normalize expects a raw_pixels sequence");
    const double w = seq.width();
    const double h = seq.height();
    if (!(w > 0.0) || !(h > 0.0))
        throw UsageError("frame dimensions must be positive");

    std::size_t clamped = 0;
    std::vector<PoseFrame> frames;
    frames.reserve(seq.size());
    for (const auto& frame : seq.frames()) {
        std::array<Keypoint, kJointCount> kps = frame.keypoints();
        for (auto& kp : kps) {
            if (kp.missing())
                continue;
            kp.x = clamp_unit(kp.x / w, clamped);
            kp.y = clamp_unit(kp.y / h, clamped);
        }
        frames.emplace_back(kps, frame.frame_index());
    }
    return {PoseSequence(std::move(frames), w, h, CoordinateSpace::normalized), clamped};
}

PoseSequence denormalize(const PoseSequence& seq, double width, double height)
{
    if (seq.space() != CoordinateSpace::normalized)
        throw UsageError("denormalize expects a normalized sequence");
    if (!(width > 0.0) || !(height > 0.0))
        throw UsageError("frame dimensions must be positive");

    std::vector<PoseFrame> frames;
    frames.reserve(seq.size());
    for (const auto& frame : seq.frames()) {
        std::array<Keypoint, kJointCount> kps = frame.keypoints();
        for (auto& kp : kps) {
            if (kp.missing())
                continue;
            kp.x *= width;
            kp.y *= height;
        }
        frames.emplace_back(kps, frame.frame_index());
    }
    return PoseSequence(std::move(frames), width, height, CoordinateSpace::raw_pixels);
}

}  // namespace kprnn
