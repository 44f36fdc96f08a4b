#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "kprnn/kp_rnn.hpp"
#include "kprnn/pose_model.hpp"

namespace kprnn::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("kprnn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline PoseVector random_pose_vector(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(kPoseDims);
    for (auto& x : v)
        x = u(rng);
    return PoseVector(v);
}

/// Random normalized frame; roughly 10% of joints missing.
inline PoseFrame random_normalized_frame(std::mt19937_64& rng, std::int64_t index)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<Keypoint, kJointCount> kps{};
    for (auto& kp : kps) {
        if (u(rng) < 0.1)
            continue;
        kp = Keypoint{u(rng), u(rng), 0.01 + 0.99 * u(rng)};
    }
    return PoseFrame(kps, index);
}

/// Random parameters with entries uniform in [-scale, scale] (no structure, for oracle tests).
inline NetworkParams random_params(const NetworkDims& dims, std::uint64_t seed, double scale)
{
    auto params = NetworkParams::zeros(dims);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto t : params.tensors())
        for (auto& v : t)
            v = u(rng);
    return params;
}

}  // namespace kprnn::test
