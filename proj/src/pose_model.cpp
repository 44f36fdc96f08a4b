#include "kprnn/pose_model.hpp"

#include <cmath>
#include <string>

#include "kprnn/error.hpp"

namespace kprnn {

void validate_keypoint(const Keypoint& kp)
{
    if (!std::isfinite(kp.x) || !std::isfinite(kp.y))
        throw DataError("keypoint has non-finite coordinates");
    if (!(kp.c >= 0.0 && kp.c <= 1.0))
        throw DataError("keypoint confidence " + std::to_string(kp.c) + " outside [0,1]");
    if (kp.c == 0.0 && (kp.x != 0.0 || kp.y != 0.0))
        throw DataError("missing keypoint (c = 0) must be at (0,0)");
}

PoseFrame::PoseFrame(std::vector<Keypoint> keypoints, std::int64_t frame_index)
    : frame_index_(frame_index)
{
    if (keypoints.size() != kJointCount)
        throw DataError("pose frame needs exactly 25 keypoints, got " + std::to_string(keypoints.size()));
    if (frame_index < 0)
        throw DataError("negative frame index " + std::to_string(frame_index));
    for (std::size_t i = 0; i < kJointCount; ++i) {
        validate_keypoint(keypoints[i]);
        keypoints_[i] = keypoints[i];
    }
}

PoseFrame::PoseFrame(const std::array<Keypoint, kJointCount>& keypoints, std::int64_t frame_index)
    : keypoints_(keypoints), frame_index_(frame_index)
{
    if (frame_index < 0)
        throw DataError("negative frame index " + std::to_string(frame_index));
    for (const auto& kp : keypoints_)
        validate_keypoint(kp);
}

PoseFrame PoseFrame::with_index(std::int64_t frame_index) const
{
    return PoseFrame(keypoints_, frame_index);
}

std::string_view to_string(CoordinateSpace space)
{
    return space == CoordinateSpace::normalized ? "normalized" : "raw_pixels";
}

CoordinateSpace parse_space(std::string_view tag)
{
    if (tag == "normalized")
        return CoordinateSpace::normalized;
    if (tag == "raw_pixels")
        return CoordinateSpace::raw_pixels;
    throw DataError("unknown coordinate space '" + std::string(tag) + "'");
}

PoseSequence::PoseSequence(std::vector<PoseFrame> frames, double width, double height, CoordinateSpace space)
    : frames_(std::move(frames)), width_(width), height_(height), space_(space)
{
    if (frames_.empty())
        throw DataError("pose sequence must contain at least one frame");
    if (!(width_ > 0.0) || !(height_ > 0.0) || !std::isfinite(width_) || !std::isfinite(height_))
        throw DataError("pose sequence needs positive frame dimensions");
    for (std::size_t i = 1; i < frames_.size(); ++i) {
        if (frames_[i].frame_index() <= frames_[i - 1].frame_index())
            throw DataError("frame indices must be strictly increasing (at position " + std::to_string(i) + ")");
    }
    if (space_ == CoordinateSpace::normalized) {
        for (const auto& frame : frames_) {
            for (const auto& kp : frame.keypoints()) {
                if (kp.missing())
                    continue;
                if (kp.x < 0.0 || kp.x > 1.0 || kp.y < 0.0 || kp.y > 1.0)
                    throw DataError("normalized keypoint outside [0,1] at frame " + std::to_string(frame.frame_index()));
            }
        }
    }
}

PoseVector::PoseVector(std::span<const double> values)
{
    if (values.size() != kPoseDims)
        throw DataError("pose vector needs exactly 50 values, got " + std::to_string(values.size()));
    for (std::size_t i = 0; i < kPoseDims; ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw DataError("pose vector element " + std::to_string(i) + " outside [0,1]");
        values_[i] = values[i];
    }
}

PoseVector frame_to_vector(const PoseFrame& frame, CoordinateSpace space)
{
    if (space != CoordinateSpace::normalized)
        throw UsageError("frame_to_vector requires a normalized frame");
    std::array<double, kPoseDims> values{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        values[2 * j] = frame[j].x;
        values[2 * j + 1] = frame[j].y;
    }
    return PoseVector(values);
}

PoseFrame vector_to_frame(const PoseVector& v, std::int64_t frame_index)
{
    std::array<Keypoint, kJointCount> keypoints{};
    for (std::size_t j = 0; j < kJointCount; ++j)
        keypoints[j] = Keypoint{v[2 * j], v[2 * j + 1], 1.0};
    return PoseFrame(keypoints, frame_index);
}

Centroid centroid(const PoseFrame& frame)
{
    Centroid out;
    std::size_t n = 0;
    for (const auto& kp : frame.keypoints()) {
        if (kp.missing())
            continue;
        out.x += kp.x;
        out.y += kp.y;
        ++n;
    }
    if (n > 0) {
        out.x /= static_cast<double>(n);
        out.y /= static_cast<double>(n);
        out.valid = true;
    }
    return out;
}

}  // namespace kprnn
