#include "kprnn/pose_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kprnn/error.hpp"

namespace kprnn {

namespace {

using nlohmann::json;

json keypoints_to_json(const PoseFrame& frame)
{
    json flat = json::array();
    for (const auto& kp : frame.keypoints()) {
        flat.push_back(kp.x);
        flat.push_back(kp.y);
        flat.push_back(kp.c);
    }
    return flat;
}

PoseFrame keypoints_from_json(const json& flat, std::int64_t frame_index)
{
    if (!flat.is_array() || flat.size() != 3 * kJointCount)
        throw DataError("keypoint array at frame " + std::to_string(frame_index) + " must have 75 numbers");
    std::array<Keypoint, kJointCount> kps{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
            if (!flat[3 * j + k].is_number())
                throw DataError("non-numeric keypoint value at frame " + std::to_string(frame_index));
        }
        kps[j] = Keypoint{flat[3 * j].get<double>(), flat[3 * j + 1].get<double>(), flat[3 * j + 2].get<double>()};
    }
    return PoseFrame(kps, frame_index);
}

json parse_envelope(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed pose file: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", std::string()) != kPoseFileFormat)
        throw DataError("not a kpseq/1 pose file");
    for (const char* key : {"width", "height", "space", "frames"}) {
        if (!doc.contains(key))
            throw DataError(std::string("pose file missing \"") + key + "\"");
    }
    if (!doc["width"].is_number() || !doc["height"].is_number() || !doc["frames"].is_array() ||
        !doc["space"].is_string())
        throw DataError("pose file has mistyped header fields");
    return doc;
}

std::int64_t frame_index_of(const json& frame)
{
    if (!frame.is_object() || !frame.contains("frame_index") || !frame["frame_index"].is_number_integer())
        throw DataError("pose file frame without integer \"frame_index\"");
    return frame["frame_index"].get<std::int64_t>();
}

json envelope(double width, double height, CoordinateSpace space)
{
    json doc;
    doc["format"] = kPoseFileFormat;
    doc["width"] = width;
    doc["height"] = height;
    doc["space"] = to_string(space);
    doc["frames"] = json::array();
    return doc;
}

}  // namespace

std::string serialize_sequence(const PoseSequence& seq)
{
    auto doc = envelope(seq.width(), seq.height(), seq.space());
    for (const auto& frame : seq.frames())
        doc["frames"].push_back({{"frame_index", frame.frame_index()}, {"keypoints", keypoints_to_json(frame)}});
    return doc.dump();
}

PoseSequence parse_sequence(std::string_view text)
{
    const auto doc = parse_envelope(text);
    std::vector<PoseFrame> frames;
    for (const auto& f : doc["frames"]) {
        const auto index = frame_index_of(f);
        if (!f.contains("keypoints"))
            throw DataError("frame " + std::to_string(index) + " has no \"keypoints\" (multi-person file? run track first)");
        frames.push_back(keypoints_from_json(f["keypoints"], index));
    }
    return PoseSequence(std::move(frames), doc["width"].get<double>(), doc["height"].get<double>(),
                        parse_space(doc["space"].get<std::string>()));
}

std::string serialize_recording(const MultiPersonRecording& rec)
{
    auto doc = envelope(rec.width, rec.height, CoordinateSpace::raw_pixels);
    for (const auto& frame : rec.frames) {
        json people = json::array();
        for (const auto& person : frame.people)
            people.push_back(keypoints_to_json(person));
        doc["frames"].push_back({{"frame_index", frame.frame_index}, {"people", std::move(people)}});
    }
    return doc.dump();
}

MultiPersonRecording parse_recording(std::string_view text)
{
    const auto doc = parse_envelope(text);
    if (parse_space(doc["space"].get<std::string>()) != CoordinateSpace::raw_pixels)
        throw DataError("multi-person recordings must be in raw_pixels space");
    MultiPersonRecording rec;
    rec.width = doc["width"].get<double>();
    rec.height = doc["height"].get<double>();
    if (!(rec.width > 0.0) || !(rec.height > 0.0))
        throw DataError("recording needs positive frame dimensions");
    for (const auto& f : doc["frames"]) {
        MultiPersonFrame frame;
        frame.frame_index = frame_index_of(f);
        if (!f.contains("people") || !f["people"].is_array())
            throw DataError("frame " + std::to_string(frame.frame_index) + " has no \"people\" array");
        for (const auto& person : f["people"])
            frame.people.push_back(keypoints_from_json(person, frame.frame_index));
        if (!rec.frames.empty() && frame.frame_index <= rec.frames.back().frame_index)
            throw DataError("frame indices must be strictly increasing");
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw DataError("write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot rename into " + path.string() + ": " + ec.message());
}

}  // namespace kprnn
