#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kprnn/openpose_ingest.hpp"
#include "kprnn/pose_model.hpp"

namespace kprnn {

inline constexpr std::string_view kPoseFileFormat = "kpseq/1";

/// Multi-person frames plus the footage geometry they were detected in.
struct MultiPersonRecording {
    double width = 0.0;
    double height = 0.0;
    std::vector<MultiPersonFrame> frames;

    friend bool operator==(const MultiPersonRecording&, const MultiPersonRecording&) = default;
};

// Envelope: {"format":"kpseq/1","width":W,"height":H,"space":S,"frames":[...]}.
// Single-person frames are {"frame_index":i,"keypoints":[75 numbers]},
// multi-person frames are {"frame_index":i,"people":[[75 numbers],...]}.
// Keypoint arrays use the OpenPose x,y,c interleaving.

std::string serialize_sequence(const PoseSequence& seq);
PoseSequence parse_sequence(std::string_view text);

/// Multi-person recordings are always raw pixel space.
std::string serialize_recording(const MultiPersonRecording& rec);
MultiPersonRecording parse_recording(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace kprnn
