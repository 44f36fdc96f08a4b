#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace kprnn {

inline constexpr std::size_t kJointCount = 25;
inline constexpr std::size_t kPoseDims = 2 * kJointCount;

/// One body joint. Confidence 0 marks an undetected joint, which must sit at (0,0).
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0;

    [[nodiscard]] bool missing() const noexcept { return c == 0.0; }

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// Throws DataError if the keypoint violates the confidence / missing-joint convention.
void validate_keypoint(const Keypoint& kp);

/// One 25-joint body detection (BODY_25 order) at a given frame.
class PoseFrame {
public:
    PoseFrame() = default;
    /// Throws DataError unless exactly 25 valid keypoints are given.
    PoseFrame(std::vector<Keypoint> keypoints, std::int64_t frame_index);
    PoseFrame(const std::array<Keypoint, kJointCount>& keypoints, std::int64_t frame_index);

    [[nodiscard]] const std::array<Keypoint, kJointCount>& keypoints() const noexcept { return keypoints_; }
    [[nodiscard]] const Keypoint& operator[](std::size_t joint) const { return keypoints_.at(joint); }
    [[nodiscard]] std::int64_t frame_index() const noexcept { return frame_index_; }

    [[nodiscard]] PoseFrame with_index(std::int64_t frame_index) const;

    friend bool operator==(const PoseFrame&, const PoseFrame&) = default;

private:
    std::array<Keypoint, kJointCount> keypoints_{};
    std::int64_t frame_index_ = 0;
};

enum class CoordinateSpace { raw_pixels, normalized };

std::string_view to_string(CoordinateSpace space);
/// Throws DataError on unknown tags.
CoordinateSpace parse_space(std::string_view tag);

/// Single-person, time-ordered pose track plus the geometry of the source footage.
class PoseSequence {
public:
    /// Throws DataError on empty frames, non-increasing indices, bad dimensions,
    /// or normalized coordinates outside [0,1].
    PoseSequence(std::vector<PoseFrame> frames, double width, double height, CoordinateSpace space);

    [[nodiscard]] const std::vector<PoseFrame>& frames() const noexcept { return frames_; }
    [[nodiscard]] std::size_t size() const noexcept { return frames_.size(); }
    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] double height() const noexcept { return height_; }
    [[nodiscard]] CoordinateSpace space() const noexcept { return space_; }

    friend bool operator==(const PoseSequence&, const PoseSequence&) = default;

private:
    std::vector<PoseFrame> frames_;
    double width_ = 0.0;
    double height_ = 0.0;
    CoordinateSpace space_ = CoordinateSpace::raw_pixels;
};

/// The 50-number network encoding: x0,y0,x1,y1,...,x24,y24, every value in [0,1].
class PoseVector {
public:
    PoseVector() = default;
    /// Throws DataError on wrong length or values outside [0,1] (NaN included).
    explicit PoseVector(std::span<const double> values);

    [[nodiscard]] std::span<const double, kPoseDims> values() const noexcept { return std::span<const double, kPoseDims>(values_); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }
    [[nodiscard]] const double* data() const noexcept { return values_.data(); }
    [[nodiscard]] static constexpr std::size_t size() noexcept { return kPoseDims; }

    friend bool operator==(const PoseVector&, const PoseVector&) = default;

private:
    std::array<double, kPoseDims> values_{};
};

/// Drops confidences. Throws UsageError if `space` is not normalized.
PoseVector frame_to_vector(const PoseFrame& frame, CoordinateSpace space);

/// Inverse layout; predicted joints carry confidence 1.
PoseFrame vector_to_frame(const PoseVector& v, std::int64_t frame_index);

/// Mean position of the non-missing joints; nullopt-like flag via `valid`.
struct Centroid {
    double x = 0.0;
    double y = 0.0;
    bool valid = false;
};
Centroid centroid(const PoseFrame& frame);

}  // namespace kprnn
