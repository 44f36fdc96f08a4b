#include "kprnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kprnn/error.hpp"
#include "kprnn/kp_rnn.hpp"

namespace kprnn::synthetic {

namespace {

// Standing BODY_25 skeleton in unit-square coordinates (image y grows downward).
constexpr double kTemplate[kJointCount][2] = {
    {0.500, 0.180},  // 0 nose
    {0.500, 0.260},  // 1 neck
    {0.440, 0.270},  // 2 right shoulder
    {0.410, 0.370},  // 3 right elbow
    {0.400, 0.460},  // 4 right wrist
    {0.560, 0.270},  // 5 left shoulder
    {0.590, 0.370},  // 6 left elbow
    {0.600, 0.460},  // 7 left wrist
    {0.500, 0.480},  // 8 mid hip
    {0.465, 0.480},  // 9 right hip
    {0.460, 0.620},  // 10 right knee
    {0.455, 0.760},  // 11 right ankle
    {0.535, 0.480},  // 12 left hip
    {0.540, 0.620},  // 13 left knee
    {0.545, 0.760},  // 14 left ankle
    {0.490, 0.170},  // 15 right eye
    {0.510, 0.170},  // 16 left eye
    {0.475, 0.180},  // 17 right ear
    {0.525, 0.180},  // 18 left ear
    {0.560, 0.790},  // 19 left big toe
    {0.570, 0.785},  // 20 left small toe
    {0.540, 0.775},  // 21 left heel
    {0.440, 0.790},  // 22 right big toe
    {0.430, 0.785},  // 23 right small toe
    {0.460, 0.775},  // 24 right heel
};

// Extremities swing more than the torso.
constexpr double kAmplitude[kJointCount] = {0.04, 0.03, 0.04, 0.08, 0.12, 0.04, 0.08, 0.12, 0.03,
                                            0.03, 0.06, 0.08, 0.03, 0.06, 0.08, 0.04, 0.04, 0.04,
                                            0.04, 0.08, 0.08, 0.08, 0.08, 0.08, 0.08};

double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

std::array<Keypoint, kJointCount> pose_at(double cx, double cy, double scale, double sway, Rng& jitter, double w,
                                           double h, double confidence)
{
    std::array<Keypoint, kJointCount> kps{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
        const double x = cx + (kTemplate[j][0] - 0.5) * scale * h + sway * kAmplitude[j] * h + uniform(jitter, -1.0, 1.0);
        const double y = cy + (kTemplate[j][1] - 0.5) * scale * h + uniform(jitter, -1.0, 1.0);
        kps[j] = Keypoint{std::clamp(x, 1.0, w - 1.0), std::clamp(y, 1.0, h - 1.0), confidence};
    }
    return kps;
}

}  // namespace

std::vector<PoseSequence> dance_sequences(const DanceOptions& options)
{
    if (options.sequences == 0 || options.frames == 0)
        throw UsageError("dance generator needs at least one sequence and one frame");
    if (!(options.min_period > 0.0 && options.max_period >= options.min_period))
        throw UsageError("dance generator periods must satisfy 0 < min <= max");

    Rng rng(options.seed);
    std::array<double, kJointCount> psi{};
    for (auto& p : psi)
        p = uniform(rng, 0.0, 2.0 * std::numbers::pi);

    std::vector<PoseSequence> out;
    out.reserve(options.sequences);
    for (std::size_t s = 0; s < options.sequences; ++s) {
        const double dx = uniform(rng, -0.1, 0.1);
        const double dy = uniform(rng, -0.05, 0.05);
        const double scale = uniform(rng, 0.6, 1.0);
        const double period = uniform(rng, options.min_period, options.max_period);
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);

        std::vector<PoseFrame> frames;
        frames.reserve(options.frames);
        for (std::size_t t = 0; t < options.frames; ++t) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(t) / period + phase;
            std::array<Keypoint, kJointCount> kps{};
            for (std::size_t j = 0; j < kJointCount; ++j) {
                const double a = scale * kAmplitude[j];
                const double x = kTemplate[j][0] + dx + a * std::cos(theta + psi[j]);
                const double y = kTemplate[j][1] + dy + 0.5 * a * std::sin(theta + psi[j]);
                kps[j] = Keypoint{std::clamp(x, 0.02, 0.98), std::clamp(y, 0.02, 0.98), 1.0};
            }
            frames.emplace_back(kps, static_cast<std::int64_t>(t));
        }
        out.emplace_back(std::move(frames), options.width, options.height, CoordinateSpace::normalized);
    }
    return out;
}

Scene two_person_scene(const SceneOptions& options)
{
    const double w = options.width;
    const double h = options.height;
    Rng rng(options.seed);
    Rng jitter(options.seed ^ 0xA5A5A5A5ULL);

    // Centroids stay in x in [0.12w, 0.35w] (left) and [0.65w, 0.88w] (right).
    const double left_x = uniform(rng, 0.18, 0.29) * w;
    const double right_x = uniform(rng, 0.71, 0.82) * w;
    const double period = uniform(rng, 60.0, 120.0);
    const double phase_l = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double phase_r = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double scale = 0.8;

    Scene scene;
    scene.width = w;
    scene.height = h;
    for (std::size_t t = 0; t < options.frames; ++t) {
        MultiPersonFrame frame;
        frame.frame_index = static_cast<std::int64_t>(t);
        const bool empty =
            std::find(options.empty_frames.begin(), options.empty_frames.end(), t) != options.empty_frames.end();
        if (empty) {
            scene.frames.push_back(std::move(frame));
            scene.left_index.emplace_back(std::nullopt);
            continue;
        }
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(t) / period;
        const double sway = std::sin(theta * 3.0);
        auto left = pose_at(left_x + 0.05 * w * std::sin(theta + phase_l), 0.5 * h, scale, sway, jitter, w, h, 0.9);
        auto right = pose_at(right_x + 0.05 * w * std::sin(theta + phase_r), 0.5 * h, scale, -sway, jitter, w, h, 0.6);
        // Drop a joint now and then so distances run over partial overlaps.
        if (uniform01(rng) < 0.2)
            left[static_cast<std::size_t>(uniform(rng, 0.0, 24.999))] = Keypoint{};
        if (uniform01(rng) < 0.2)
            right[static_cast<std::size_t>(uniform(rng, 0.0, 24.999))] = Keypoint{};

        const bool left_first = uniform01(rng) < 0.5;
        frame.people.emplace_back(left_first ? left : right, frame.frame_index);
        frame.people.emplace_back(left_first ? right : left, frame.frame_index);
        scene.frames.push_back(std::move(frame));
        scene.left_index.emplace_back(left_first ? 0 : 1);
    }
    return scene;
}

PoseFrame random_frame(std::uint64_t seed, double width, double height, std::int64_t frame_index)
{
    Rng rng(seed);
    std::array<Keypoint, kJointCount> kps{};
    for (auto& kp : kps) {
        if (uniform01(rng) < 0.1)
            continue;
        kp = Keypoint{uniform(rng, 0.0, width), uniform(rng, 0.0, height), uniform(rng, 0.01, 1.0)};
    }
    return PoseFrame(kps, frame_index);
}

}  // namespace kprnn::synthetic
