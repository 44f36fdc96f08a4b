#include <doctest.h>

#include <random>

#include "kprnn/error.hpp"
#include "kprnn/pose_model.hpp"
#include "test_support.hpp"

using namespace kprnn;

TEST_CASE("pose frame requires exactly 25 keypoints")
{
    CHECK_THROWS_AS(PoseFrame(std::vector<Keypoint>(24), 0), DataError);
    CHECK_THROWS_AS(PoseFrame(std::vector<Keypoint>(26), 0), DataError);
    CHECK_NOTHROW(PoseFrame(std::vector<Keypoint>(25), 0));
}

TEST_CASE("keypoint invariants")
{
    std::vector<Keypoint> kps(25);
    kps[3] = Keypoint{1.0, 2.0, 1.5};
    CHECK_THROWS_AS(PoseFrame(kps, 0), DataError);
    kps[3] = Keypoint{1.0, 2.0, 0.0};
    CHECK_THROWS_AS(PoseFrame(kps, 0), DataError);
    kps[3] = Keypoint{1.0, 2.0, 0.4};
    CHECK_NOTHROW(PoseFrame(kps, 0));
}

TEST_CASE("pose sequence invariants")
{
    const PoseFrame a(std::vector<Keypoint>(25), 0);
    const PoseFrame b(std::vector<Keypoint>(25), 1);
    CHECK_THROWS_AS(PoseSequence({}, 10, 10, CoordinateSpace::raw_pixels), DataError);
    CHECK_THROWS_AS(PoseSequence({b, a}, 10, 10, CoordinateSpace::raw_pixels), DataError);
    CHECK_THROWS_AS(PoseSequence({a, a}, 10, 10, CoordinateSpace::raw_pixels), DataError);
    CHECK_THROWS_AS(PoseSequence({a}, 0, 10, CoordinateSpace::raw_pixels), DataError);

    std::vector<Keypoint> kps(25);
    kps[0] = Keypoint{1.5, 0.5, 1.0};
    CHECK_THROWS_AS(PoseSequence({PoseFrame(kps, 0)}, 10, 10, CoordinateSpace::normalized), DataError);
    CHECK_NOTHROW(PoseSequence({PoseFrame(kps, 0)}, 10, 10, CoordinateSpace::raw_pixels));
}

TEST_CASE("pose vector range")
{
    std::vector<double> v(50, 0.5);
    CHECK_NOTHROW(PoseVector{v});
    v[7] = 1.0001;
    CHECK_THROWS_AS(PoseVector{v}, DataError);
    v[7] = std::nan("");
    CHECK_THROWS_AS(PoseVector{v}, DataError);
    CHECK_THROWS_AS(PoseVector(std::vector<double>(49, 0.0)), DataError);
}

TEST_CASE("frame_to_vector layout")
{
    const PoseFrame empty(std::vector<Keypoint>(25), 0);
    const auto zeros = frame_to_vector(empty, CoordinateSpace::normalized);
    for (double x : zeros.values())
        CHECK(x == 0.0);

    std::vector<Keypoint> kps(25);
    kps[0] = Keypoint{0.5, 0.25, 0.8};
    const auto v = frame_to_vector(PoseFrame(kps, 0), CoordinateSpace::normalized);
    CHECK(v[0] == 0.5);
    CHECK(v[1] == 0.25);
    for (std::size_t i = 2; i < 50; ++i)
        CHECK(v[i] == 0.0);

    CHECK_THROWS_AS(frame_to_vector(empty, CoordinateSpace::raw_pixels), UsageError);
}

TEST_CASE("vector_to_frame layout")
{
    const auto f0 = vector_to_frame(PoseVector(std::vector<double>(50, 0.0)), 3);
    CHECK(f0.frame_index() == 3);
    for (const auto& kp : f0.keypoints())
        CHECK(kp == Keypoint{0.0, 0.0, 1.0});

    std::vector<double> v(50, 0.0);
    v[48] = 0.9;
    v[49] = 0.1;
    const auto f = vector_to_frame(PoseVector(v), 0);
    CHECK(f[24] == Keypoint{0.9, 0.1, 1.0});
}

TEST_CASE("frame/vector round trips")
{
    std::mt19937_64 rng(11);
    for (int n = 0; n < 1000; ++n) {
        const auto frame = test::random_normalized_frame(rng, n);
        const auto back = vector_to_frame(frame_to_vector(frame, CoordinateSpace::normalized), n);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            REQUIRE(back[j].x == frame[j].x);
            REQUIRE(back[j].y == frame[j].y);
            REQUIRE(back[j].c == 1.0);
        }

        const auto vec = test::random_pose_vector(rng);
        REQUIRE(frame_to_vector(vector_to_frame(vec, 0), CoordinateSpace::normalized) == vec);
    }
}

TEST_CASE("centroid ignores missing joints")
{
    std::vector<Keypoint> kps(25);
    kps[2] = Keypoint{10, 20, 1};
    kps[4] = Keypoint{30, 40, 0.5};
    const auto c = centroid(PoseFrame(kps, 0));
    CHECK(c.valid);
    CHECK(c.x == 20.0);
    CHECK(c.y == 30.0);
    CHECK_FALSE(centroid(PoseFrame(std::vector<Keypoint>(25), 0)).valid);
}
