#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "kprnn/pose_model.hpp"

namespace kprnn {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major, no alpha.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(std::size_t w, std::size_t h, Rgb fill);

    [[nodiscard]] Rgb at(std::size_t x, std::size_t y) const;
    void set(std::size_t x, std::size_t y, Rgb c);

    friend bool operator==(const Image&, const Image&) = default;
};

inline constexpr std::size_t kLimbCount = 24;

/// BODY_25 limb connectivity by joint index, in drawing order.
inline constexpr std::array<std::pair<std::size_t, std::size_t>, kLimbCount> kBody25Limbs = {{
    {1, 8},   {1, 2},   {1, 5},   {2, 3},   {3, 4},   {5, 6},   {6, 7},   {8, 9},
    {9, 10},  {10, 11}, {8, 12},  {12, 13}, {13, 14}, {1, 0},   {0, 15},  {15, 17},
    {0, 16},  {16, 18}, {14, 19}, {19, 20}, {14, 21}, {11, 22}, {22, 23}, {11, 24},
}};

/// Fixed limb palette in the spirit of the OpenPose renderer.
std::vector<Rgb> default_palette();

struct RenderStyle {
    std::size_t width = 512;
    std::size_t height = 512;
    Rgb background{0, 0, 0};
    double limb_thickness = 4.0;
    double joint_radius = 4.0;
    std::vector<Rgb> palette = default_palette();
    /// Preserve the source aspect ratio by padding; otherwise stretch to the canvas.
    bool letterbox = true;

    /// Throws UsageError on zero dimensions, negative sizes or a palette of the wrong length.
    void validate() const;
};

/// Color used for joint `j`: the palette entry of the first limb touching it.
Rgb joint_color(const RenderStyle& style, std::size_t joint);

/// Draws limbs (both endpoints present) in palette order, then joint circles (c > 0).
/// Normalized frames map straight onto the canvas; raw frames are scaled from
/// source_width x source_height, letterboxed when the style asks for it.
Image render_frame(const PoseFrame& frame, CoordinateSpace space, double source_width, double source_height,
                   const RenderStyle& style);

struct RenderOptions {
    bool overwrite = false;
};

/// Writes frame_%06d.png per frame (named by frame_index). Normalized sequences are first mapped
/// back to their footage dimensions. Refuses to replace existing frames unless overwrite is set.
std::vector<std::filesystem::path> render_sequence(const PoseSequence& seq, const RenderStyle& style,
                                                   const std::filesystem::path& out_dir,
                                                   const RenderOptions& options = {});

/// Atomic PNG write (temporary file then rename).
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

}  // namespace kprnn
