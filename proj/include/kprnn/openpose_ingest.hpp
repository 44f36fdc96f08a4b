#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kprnn/pose_model.hpp"

namespace kprnn {

/// All body detections OpenPose reported for one video frame (raw pixel space).
struct MultiPersonFrame {
    std::int64_t frame_index = 0;
    std::vector<PoseFrame> people;

    friend bool operator==(const MultiPersonFrame&, const MultiPersonFrame&) = default;
};

/// Parses one OpenPose per-frame JSON document. Only "pose_keypoints_2d" is read.
/// Throws DataError on malformed JSON or schema violations.
MultiPersonFrame parse_frame(std::string_view text, std::int64_t frame_index);

/// Writes the same per-frame schema parse_frame reads.
std::string serialize_frame(const MultiPersonFrame& frame);

struct LoadOptions {
    /// Glob over file names; `{n}` captures the frame number, `*` and `?` are wildcards.
    std::string pattern = "*_{n}_keypoints.json";
    bool allow_gaps = false;
};

/// Loads every matching file in `dir`, sorted by captured frame number.
std::vector<MultiPersonFrame> load_sequence(const std::filesystem::path& dir, const LoadOptions& options = {});

}  // namespace kprnn
