#include <doctest.h>

#include <cmath>
#include <random>

#include "kprnn/error.hpp"
#include "kprnn/normalizer.hpp"
#include "kprnn/synthetic.hpp"

using namespace kprnn;

namespace {

PoseSequence one_frame(const std::vector<Keypoint>& kps, double w, double h, CoordinateSpace space)
{
    return PoseSequence({PoseFrame(kps, 0)}, w, h, space);
}

}  // namespace

TEST_CASE("normalize divides by the frame size")
{
    std::vector<Keypoint> kps(kJointCount);
    kps[0] = Keypoint{640, 360, 0.9};
    const auto r = normalize(one_frame(kps, 1280, 720, CoordinateSpace::raw_pixels));
    CHECK(r.clamped == 0);
    CHECK(r.sequence.space() == CoordinateSpace::normalized);
    CHECK(r.sequence.frames()[0][0] == Keypoint{0.5, 0.5, 0.9});
    CHECK(r.sequence.frames()[0][1] == Keypoint{0, 0, 0});
}

TEST_CASE("normalize clamps and counts out-of-frame coordinates")
{
    std::vector<Keypoint> kps(kJointCount);
    kps[0] = Keypoint{1300, -5, 0.9};
    kps[1] = Keypoint{10, 10, 0.9};
    const auto r = normalize(one_frame(kps, 1280, 720, CoordinateSpace::raw_pixels));
    CHECK(r.clamped == 2);
    CHECK(r.sequence.frames()[0][0].x == 1.0);
    CHECK(r.sequence.frames()[0][0].y == 0.0);
}

TEST_CASE("denormalize examples")
{
    std::vector<Keypoint> kps(kJointCount);
    kps[0] = Keypoint{1.0, 1.0, 1.0};
    kps[1] = Keypoint{0.0, 0.0, 1.0};
    const auto s = denormalize(one_frame(kps, 10, 10, CoordinateSpace::normalized), 1280, 720);
    CHECK(s.space() == CoordinateSpace::raw_pixels);
    CHECK(s.width() == 1280);
    CHECK(s.frames()[0][0] == Keypoint{1280, 720, 1.0});
    CHECK(s.frames()[0][1] == Keypoint{0, 0, 1.0});
    CHECK(s.frames()[0][2].missing());
}

TEST_CASE("space preconditions")
{
    const std::vector<Keypoint> kps(kJointCount);
    CHECK_THROWS_AS(normalize(one_frame(kps, 10, 10, CoordinateSpace::normalized)), UsageError);
    CHECK_THROWS_AS(denormalize(one_frame(kps, 10, 10, CoordinateSpace::raw_pixels), 10, 10), UsageError);
    CHECK_THROWS_AS(denormalize(one_frame(kps, 10, 10, CoordinateSpace::normalized), 0, 10), UsageError);
}

TEST_CASE("normalize/denormalize round trip on random sequences")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> dim(100.0, 4000.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double w = std::round(dim(rng));
        const double h = std::round(dim(rng));
        std::vector<PoseFrame> frames;
        for (int f = 0; f < 3; ++f)
            frames.push_back(synthetic::random_frame(rng(), w, h, f));
        const PoseSequence seq(frames, w, h, CoordinateSpace::raw_pixels);
        const auto norm = normalize(seq);
        REQUIRE(norm.clamped == 0);
        const auto back = denormalize(norm.sequence, w, h);
        for (std::size_t f = 0; f < seq.size(); ++f)
            for (std::size_t j = 0; j < kJointCount; ++j) {
                const auto& a = seq.frames()[f][j];
                const auto& b = back.frames()[f][j];
                worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y)});
                REQUIRE(a.c == b.c);
            }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("normalize is monotone in x")
{
    std::vector<Keypoint> kps(kJointCount);
    kps[0] = Keypoint{100, 10, 1};
    kps[1] = Keypoint{101, 10, 1};
    kps[2] = Keypoint{1000, 10, 1};
    const auto f = normalize(one_frame(kps, 1280, 720, CoordinateSpace::raw_pixels)).sequence.frames()[0];
    CHECK(f[0].x < f[1].x);
    CHECK(f[1].x < f[2].x);
}
