#include "kprnn/openpose_ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "kprnn/error.hpp"

namespace kprnn {

namespace {

constexpr std::size_t kValuesPerPerson = 3 * kJointCount;

PoseFrame parse_person(const nlohmann::json& person, std::size_t person_index, std::int64_t frame_index)
{
    const auto where = " (person " + std::to_string(person_index) + ")";
    if (!person.is_object() || !person.contains("pose_keypoints_2d"))
        throw DataError("missing \"pose_keypoints_2d\"" + where);
    const auto& flat = person["pose_keypoints_2d"];
    if (!flat.is_array())
        throw DataError("\"pose_keypoints_2d\" is not an array" + where);
    if (flat.size() != kValuesPerPerson)
        throw DataError("\"pose_keypoints_2d\" has " + std::to_string(flat.size()) + " values, expected 75" + where);

    std::array<Keypoint, kJointCount> keypoints{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        double v[3];
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& e = flat[3 * j + k];
            if (!e.is_number())
                throw DataError("non-numeric entry at position " + std::to_string(3 * j + k) + where);
            v[k] = e.get<double>();
        }
        if (!(v[2] >= 0.0 && v[2] <= 1.0))
            throw DataError("confidence " + std::to_string(v[2]) + " outside [0,1] at joint " + std::to_string(j) + where);
        keypoints[j] = Keypoint{v[0], v[1], v[2]};
        try {
            validate_keypoint(keypoints[j]);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at joint " + std::to_string(j) + where);
        }
    }
    return PoseFrame(keypoints, frame_index);
}

std::regex compile_pattern(std::string_view pattern)
{
    std::string re;
    std::size_t captures = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const char ch = pattern[i];
        if (pattern.substr(i, 3) == "{n}") {
            re += "([0-9]+)";
            ++captures;
            i += 2;
        } else if (ch == '*') {
            re += ".*?";
        } else if (ch == '?') {
            re += '.';
        } else if (std::string_view("\\^$.|+()[]{}").find(ch) != std::string_view::npos) {
            re += '\\';
            re += ch;
        } else {
            re += ch;
        }
    }
    if (captures != 1)
        throw UsageError("file pattern '" + std::string(pattern) + "' must contain exactly one {n} capture");
    return std::regex(re);
}

}  // namespace

MultiPersonFrame parse_frame(std::string_view text, std::int64_t frame_index)
{
    if (frame_index < 0)
        throw DataError("negative frame index");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("people"))
        throw DataError("missing \"people\" key");
    const auto& people = doc["people"];
    if (!people.is_array())
        throw DataError("\"people\" is not an array");

    MultiPersonFrame out;
    out.frame_index = frame_index;
    out.people.reserve(people.size());
    for (std::size_t p = 0; p < people.size(); ++p)
        out.people.push_back(parse_person(people[p], p, frame_index));
    return out;
}

std::string serialize_frame(const MultiPersonFrame& frame)
{
    nlohmann::json people = nlohmann::json::array();
    for (const auto& person : frame.people) {
        nlohmann::json flat = nlohmann::json::array();
        for (const auto& kp : person.keypoints()) {
            flat.push_back(kp.x);
            flat.push_back(kp.y);
            flat.push_back(kp.c);
        }
        people.push_back({{"pose_keypoints_2d", std::move(flat)}});
    }
    nlohmann::json doc;
    doc["version"] = 1.3;
    doc["people"] = std::move(people);
    return doc.dump();
}

std::vector<MultiPersonFrame> load_sequence(const std::filesystem::path& dir, const LoadOptions& options)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw DataError("not a directory: " + dir.string());
    const auto re = compile_pattern(options.pattern);

    std::map<std::int64_t, fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const auto name = entry.path().filename().string();
        std::smatch m;
        if (!std::regex_match(name, m, re))
            continue;
        std::int64_t index = 0;
        try {
            index = std::stoll(m[1].str());
        } catch (const std::out_of_range&) {
            throw DataError("frame number out of range in " + name);
        }
        auto [it, inserted] = files.emplace(index, entry.path());
        if (!inserted)
            throw DataError("duplicate frame number " + std::to_string(index) + ": " + it->second.filename().string() +
                            " and " + name);
    }
    if (files.empty())
        throw DataError("no files matching '" + options.pattern + "' in " + dir.string());

    std::vector<MultiPersonFrame> out;
    out.reserve(files.size());
    std::int64_t expected = files.begin()->first;
    for (const auto& [index, path] : files) {
        if (index != expected && !options.allow_gaps)
            throw DataError("gap in frame numbers: missing index " + std::to_string(expected));
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw DataError("cannot read " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            out.push_back(parse_frame(buf.str(), index));
        } catch (const DataError& e) {
            throw DataError(path.filename().string() + ": " + e.what());
        }
        expected = index + 1;
    }
    return out;
}

}  // namespace kprnn
