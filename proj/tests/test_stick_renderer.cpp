#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "kprnn/error.hpp"
#include "kprnn/stick_renderer.hpp"
#include "kprnn/synthetic.hpp"
#include "test_support.hpp"

using namespace kprnn;

namespace {

PoseFrame limb_frame(Keypoint a, Keypoint b, std::size_t ja = 1, std::size_t jb = 2)
{
    std::vector<Keypoint> kps(kJointCount);
    kps[ja] = a;
    kps[jb] = b;
    return PoseFrame(kps, 0);
}

RenderStyle small_style()
{
    RenderStyle s;
    s.width = 200;
    s.height = 100;
    return s;
}

std::size_t painted(const Image& img, Rgb bg)
{
    std::size_t n = 0;
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            n += img.at(x, y) == bg ? 0 : 1;
    return n;
}

}  // namespace

TEST_CASE("palette and limb table")
{
    CHECK(default_palette().size() == kLimbCount);
    CHECK(kBody25Limbs[0] == std::pair<std::size_t, std::size_t>{1, 8});
    CHECK(kBody25Limbs[23] == std::pair<std::size_t, std::size_t>{11, 24});
    std::set<std::size_t> joints;
    for (const auto& [a, b] : kBody25Limbs) {
        joints.insert(a);
        joints.insert(b);
    }
    CHECK(joints.size() == kJointCount);
    const RenderStyle s;
    CHECK(joint_color(s, 8) == s.palette[0]);
    CHECK(joint_color(s, 0) == s.palette[13]);
}

TEST_CASE("style validation")
{
    auto s = small_style();
    s.width = 0;
    CHECK_THROWS_AS(s.validate(), UsageError);
    s = small_style();
    s.palette.pop_back();
    CHECK_THROWS_AS(s.validate(), UsageError);
    s = small_style();
    s.limb_thickness = -1;
    CHECK_THROWS_AS(s.validate(), UsageError);
    const PoseFrame empty(std::vector<Keypoint>(kJointCount), 0);
    s = small_style();
    s.palette.clear();
    CHECK_THROWS_AS(render_frame(empty, CoordinateSpace::normalized, 1, 1, s), UsageError);
}

TEST_CASE("all-missing frame renders as background")
{
    auto s = small_style();
    s.background = Rgb{10, 20, 30};
    const PoseFrame empty(std::vector<Keypoint>(kJointCount), 0);
    CHECK(render_frame(empty, CoordinateSpace::raw_pixels, 1920, 1080, s) == Image(200, 100, s.background));
}

TEST_CASE("single limb: midpoint carries the limb color, joints drawn last")
{
    auto s = small_style();
    s.joint_radius = 2;
    const auto frame = limb_frame({20, 50.5, 1}, {180, 50.5, 1});
    const auto img = render_frame(frame, CoordinateSpace::raw_pixels, 200, 100, s);
    CHECK(img.at(100, 50) == s.palette[1]);
    CHECK(img.at(20, 50) == joint_color(s, 1));
    CHECK(img.at(180, 50) == joint_color(s, 2));
    CHECK(img.at(100, 10) == s.background);
    CHECK(img.at(100, 90) == s.background);

    // Missing endpoint: no limb, one joint circle.
    const auto half = render_frame(limb_frame({20, 50.5, 1}, {0, 0, 0}), CoordinateSpace::raw_pixels, 200, 100, s);
    CHECK(half.at(100, 50) == s.background);
    CHECK(half.at(20, 50) == joint_color(s, 1));
}

TEST_CASE("limb without joints when radius is zero; degenerate limb is a dot")
{
    auto s = small_style();
    s.joint_radius = 0;
    const auto img = render_frame(limb_frame({50, 50.5, 1}, {50, 50.5, 1}), CoordinateSpace::raw_pixels, 200, 100, s);
    CHECK(img.at(50, 50) == s.palette[1]);
    CHECK(painted(img, s.background) > 0);
    CHECK(painted(img, s.background) < 30);
}

TEST_CASE("rendering is deterministic and keeps canvas size")
{
    auto s = small_style();
    for (const auto& [w, h] : {std::pair{1920.0, 1080.0}, {1080.0, 1920.0}, {100.0, 100.0}, {4000.0, 300.0}}) {
        const auto frame = synthetic::random_frame(42, w, h, 0);
        const auto a = render_frame(frame, CoordinateSpace::raw_pixels, w, h, s);
        const auto b = render_frame(frame, CoordinateSpace::raw_pixels, w, h, s);
        CHECK(a == b);
        CHECK(a.width == 200);
        CHECK(a.height == 100);
    }
}

TEST_CASE("letterboxing pads instead of stretching")
{
    auto s = small_style();  // 2:1 canvas
    s.joint_radius = 0;
    // Square source: content fills the middle 100x100, pillarboxes are 50 wide.
    const auto frame = limb_frame({0, 50, 1}, {100, 50, 1});
    const auto img = render_frame(frame, CoordinateSpace::raw_pixels, 100, 100, s);
    CHECK(img.at(10, 50) == s.background);
    CHECK(img.at(60, 50) == s.palette[1]);
    CHECK(img.at(140, 50) == s.palette[1]);
    CHECK(img.at(190, 50) == s.background);

    s.letterbox = false;
    const auto stretched = render_frame(frame, CoordinateSpace::raw_pixels, 100, 100, s);
    CHECK(stretched.at(10, 50) == s.palette[1]);
    CHECK(stretched.at(190, 50) == s.palette[1]);
}

TEST_CASE("normalized frames map onto the whole canvas")
{
    auto s = small_style();
    s.joint_radius = 0;
    const auto img = render_frame(limb_frame({0.1, 0.505, 1}, {0.9, 0.505, 1}), CoordinateSpace::normalized, 0, 0, s);
    CHECK(img.at(100, 50) == s.palette[1]);
    CHECK(img.at(10, 50) == s.background);
}

TEST_CASE("PNG round trip")
{
    test::TempDir dir;
    Image img(7, 5, Rgb{1, 2, 3});
    img.set(6, 4, Rgb{250, 128, 0});
    write_png(dir / "x.png", img);
    CHECK(read_png(dir / "x.png") == img);
    CHECK_THROWS_AS(read_png(dir / "none.png"), DataError);
    std::ofstream(dir / "bad.png") << "not a png";
    CHECK_THROWS_AS(read_png(dir / "bad.png"), DataError);
}

TEST_CASE("render_sequence naming, contents and overwrite policy")
{
    test::TempDir dir;
    std::mt19937_64 rng(1);
    std::vector<PoseFrame> frames;
    for (int i = 0; i < 3; ++i)
        frames.push_back(synthetic::random_frame(rng(), 640, 360, i));
    const PoseSequence seq(frames, 640, 360, CoordinateSpace::raw_pixels);
    auto s = small_style();
    const auto out = dir / "frames";
    const auto files = render_sequence(seq, s, out);
    REQUIRE(files.size() == 3);
    for (int i = 0; i < 3; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.png", i);
        CHECK(files[i] == out / name);
        CHECK(read_png(files[i]) == render_frame(frames[i], CoordinateSpace::raw_pixels, 640, 360, s));
    }
    CHECK_THROWS_AS(render_sequence(seq, s, out), DataError);
    CHECK_NOTHROW(render_sequence(seq, s, out, RenderOptions{true}));

    std::ofstream(dir / "blocker") << "file";
    CHECK_THROWS_AS(render_sequence(seq, s, dir / "blocker"), DataError);
}

TEST_CASE("normalized sequences render through their footage size")
{
    test::TempDir dir;
    std::vector<Keypoint> kps(kJointCount);
    kps[1] = Keypoint{0.1, 0.5, 1};
    kps[2] = Keypoint{0.9, 0.5, 1};
    const PoseSequence seq({PoseFrame(kps, 4)}, 400, 100, CoordinateSpace::normalized);
    auto s = small_style();
    s.width = 100;
    s.height = 100;
    const auto files = render_sequence(seq, s, dir.path());
    REQUIRE(files.size() == 1);
    CHECK(files[0].filename() == "frame_000004.png");
    const auto img = read_png(files[0]);
    // 4:1 footage letterboxed into a square canvas: content occupies rows 37.5..62.5.
    CHECK(img.at(50, 50) == s.palette[1]);
    CHECK(img.at(50, 10) == s.background);
}
