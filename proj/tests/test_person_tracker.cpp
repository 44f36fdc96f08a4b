#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "kprnn/error.hpp"
#include "kprnn/person_tracker.hpp"
#include "kprnn/synthetic.hpp"

using namespace kprnn;

namespace {

PoseFrame body_at(double x, double y, double conf, std::int64_t index)
{
    std::vector<Keypoint> kps(kJointCount);
    for (std::size_t j = 0; j < kJointCount; ++j)
        kps[j] = Keypoint{x + static_cast<double>(j), y + static_cast<double>(j % 5), conf};
    return PoseFrame(kps, index);
}

MultiPersonFrame frame_of(std::int64_t index, std::vector<PoseFrame> people)
{
    return MultiPersonFrame{index, std::move(people)};
}

}  // namespace

TEST_CASE("selection rule parsing")
{
    CHECK(SelectionRule::parse("highest_confidence").kind == SelectionRule::Kind::highest_confidence);
    const auto r = SelectionRule::parse("index:2");
    CHECK(r.kind == SelectionRule::Kind::index_k);
    CHECK(r.k == 2);
    CHECK(r.to_string() == "index:2");
    CHECK_THROWS_AS(SelectionRule::parse("index:"), UsageError);
    CHECK_THROWS_AS(SelectionRule::parse("biggest"), UsageError);
}

TEST_CASE("pose_distance uses shared joints only")
{
    std::vector<Keypoint> a(kJointCount), b(kJointCount);
    a[0] = Keypoint{0, 0, 1};
    b[0] = Keypoint{3, 4, 1};
    a[1] = Keypoint{10, 10, 1};
    b[1] = Keypoint{10, 10, 1};
    a[2] = Keypoint{100, 100, 1};  // missing in b
    CHECK(pose_distance(PoseFrame(a, 0), PoseFrame(b, 0)) == doctest::Approx(2.5));

    std::vector<Keypoint> c(kJointCount);
    c[5] = Keypoint{1, 1, 1};
    CHECK(pose_distance(PoseFrame(a, 0), PoseFrame(c, 0)) == std::numeric_limits<double>::infinity());
}

TEST_CASE("single-person stream passes through unchanged")
{
    std::vector<MultiPersonFrame> frames;
    std::vector<PoseFrame> expected;
    for (int i = 0; i < 30; ++i) {
        const auto p = body_at(100.0 + i, 200.0, 0.7, i);
        frames.push_back(frame_of(i, {p}));
        expected.push_back(p);
    }
    const auto r = select_person(frames, TrackerConfig{}, 640, 480);
    CHECK(r.sequence.frames() == expected);
    CHECK(r.sequence.space() == CoordinateSpace::raw_pixels);
    CHECK(r.report.carried_frames.empty());
    CHECK(r.report.total_frames == 30);
    CHECK(r.report.chosen_initial_index == 0);
}

TEST_CASE("anchor selection")
{
    const auto lo = body_at(50, 50, 0.3, 0);
    const auto hi = body_at(400, 50, 0.8, 0);
    const auto tie = body_at(200, 50, 0.8, 0);
    CHECK(select_person({frame_of(0, {lo, hi})}, TrackerConfig{}, 640, 480).report.chosen_initial_index == 1);
    CHECK(select_person({frame_of(0, {hi, tie})}, TrackerConfig{}, 640, 480).report.chosen_initial_index == 0);

    TrackerConfig pick;
    pick.selection_rule = SelectionRule::parse("index:0");
    CHECK(select_person({frame_of(0, {lo, hi})}, pick, 640, 480).report.chosen_initial_index == 0);
    pick.selection_rule = SelectionRule::parse("index:5");
    CHECK_THROWS_AS(select_person({frame_of(0, {lo, hi})}, pick, 640, 480), DataError);
}

TEST_CASE("empty frame mid-stream is carried forward")
{
    std::vector<MultiPersonFrame> frames;
    for (int i = 0; i < 5; ++i)
        frames.push_back(frame_of(i, i == 2 ? std::vector<PoseFrame>{} : std::vector{body_at(100.0 + i, 100, 0.9, i)}));
    const auto r = select_person(frames, TrackerConfig{}, 640, 480);
    REQUIRE(r.sequence.size() == 5);
    CHECK(r.report.carried_frames == std::vector<std::int64_t>{2});
    CHECK(r.sequence.frames()[2].keypoints() == r.sequence.frames()[1].keypoints());
    CHECK(r.sequence.frames()[2].frame_index() == 2);
}

TEST_CASE("leading empty frames are back-filled and reported")
{
    std::vector<MultiPersonFrame> frames{frame_of(0, {}), frame_of(1, {}), frame_of(2, {body_at(10, 10, 1, 2)})};
    const auto r = select_person(frames, TrackerConfig{}, 640, 480);
    CHECK(r.sequence.size() == 3);
    CHECK(r.report.carried_frames == std::vector<std::int64_t>{0, 1});
    CHECK_THROWS_AS(select_person({frame_of(0, {}), frame_of(1, {})}, TrackerConfig{}, 640, 480), DataError);
    CHECK_THROWS_AS(select_person({}, TrackerConfig{}, 640, 480), DataError);
}

TEST_CASE("large jumps are rejected")
{
    // The tracked person vanishes and only a far-away person remains.
    std::vector<MultiPersonFrame> frames{frame_of(0, {body_at(10, 10, 1, 0)}), frame_of(1, {body_at(500, 300, 1, 1)})};
    const auto r = select_person(frames, TrackerConfig{}, 640, 480);
    CHECK(r.report.carried_frames == std::vector<std::int64_t>{1});
    CHECK(r.sequence.frames()[1].keypoints() == frames[0].people[0].keypoints());

    TrackerConfig loose;
    loose.max_jump = 2.0;
    CHECK(select_person(frames, loose, 640, 480).report.carried_frames.empty());
    TrackerConfig bad;
    bad.max_jump = 0.0;
    CHECK_THROWS_AS(select_person(frames, bad, 640, 480), UsageError);
}

TEST_CASE("two-person scenes: identity follows the left person")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        synthetic::SceneOptions so;
        so.seed = seed;
        so.empty_frames = {seed * 3};
        const auto scene = synthetic::two_person_scene(so);
        const auto r = select_person(scene.frames, TrackerConfig{}, scene.width, scene.height);
        REQUIRE(r.sequence.size() == scene.frames.size());
        for (std::size_t i = 0; i < scene.frames.size(); ++i) {
            const auto c = centroid(r.sequence.frames()[i]);
            CHECK(c.x < scene.width / 2);
            if (scene.left_index[i])
                CHECK(r.sequence.frames()[i] == scene.frames[i].people[*scene.left_index[i]]);
        }
        CHECK(std::find(r.report.carried_frames.begin(), r.report.carried_frames.end(),
                        scene.frames[seed * 3].frame_index) != r.report.carried_frames.end());

        const auto again = select_person(scene.frames, TrackerConfig{}, scene.width, scene.height);
        CHECK(again.sequence == r.sequence);
        CHECK(again.report.carried_frames == r.report.carried_frames);
    }
}
