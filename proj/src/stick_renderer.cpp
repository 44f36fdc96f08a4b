#include "kprnn/stick_renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include <png.h>

#include "kprnn/error.hpp"
#include "kprnn/normalizer.hpp"

namespace kprnn {

namespace {

struct Point {
    double x;
    double y;
};

double distance_to_segment(Point p, Point a, Point b)
{
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Paints every pixel whose center lies within `radius` of segment ab.
void stamp_segment(Image& img, Point a, Point b, double radius, Rgb color)
{
    const double x0 = std::floor(std::min(a.x, b.x) - radius - 1.0);
    const double x1 = std::ceil(std::max(a.x, b.x) + radius + 1.0);
    const double y0 = std::floor(std::min(a.y, b.y) - radius - 1.0);
    const double y1 = std::ceil(std::max(a.y, b.y) + radius + 1.0);
    const double w = static_cast<double>(img.width);
    const double h = static_cast<double>(img.height);
    for (double y = std::max(y0, 0.0); y <= std::min(y1, h - 1.0); y += 1.0) {
        for (double x = std::max(x0, 0.0); x <= std::min(x1, w - 1.0); x += 1.0) {
            if (distance_to_segment({x + 0.5, y + 0.5}, a, b) <= radius)
                img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), color);
        }
    }
}

struct CanvasMapping {
    double scale_x = 1.0;
    double scale_y = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;

    [[nodiscard]] Point operator()(const Keypoint& kp) const
    {
        return {offset_x + kp.x * scale_x, offset_y + kp.y * scale_y};
    }
};

CanvasMapping mapping_for(CoordinateSpace space, double sw, double sh, const RenderStyle& style)
{
    const double cw = static_cast<double>(style.width);
    const double ch = static_cast<double>(style.height);
    if (space == CoordinateSpace::normalized)
        return {cw, ch, 0.0, 0.0};
    if (!(sw > 0.0) || !(sh > 0.0))
        throw UsageError("raw-pixel rendering needs positive source dimensions");
    if (!style.letterbox)
        return {cw / sw, ch / sh, 0.0, 0.0};
    const double s = std::min(cw / sw, ch / sh);
    return {s, s, 0.5 * (cw - sw * s), 0.5 * (ch - sh * s)};
}

// Minimum stamp radius that still leaves no gaps along diagonal lines.
constexpr double kMinRadius = 0.71;

}  // namespace

Image::Image(std::size_t w, std::size_t h, Rgb fill) : width(w), height(h), rgb(w * h * 3)
{
    for (std::size_t i = 0; i < w * h; ++i) {
        rgb[3 * i] = fill.r;
        rgb[3 * i + 1] = fill.g;
        rgb[3 * i + 2] = fill.b;
    }
}

Rgb Image::at(std::size_t x, std::size_t y) const
{
    if (x >= width || y >= height)
        throw UsageError("pixel out of range");
    const auto i = 3 * (y * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(std::size_t x, std::size_t y, Rgb c)
{
    const auto i = 3 * (y * width + x);
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
}

std::vector<Rgb> default_palette()
{
    return {
        {255, 0, 85},  {255, 0, 0},   {255, 85, 0},  {255, 170, 0}, {255, 255, 0}, {170, 255, 0},
        {85, 255, 0},  {0, 255, 0},   {255, 0, 0},   {0, 255, 85},  {0, 255, 170}, {0, 255, 255},
        {0, 170, 255}, {0, 85, 255},  {0, 0, 255},   {255, 0, 170}, {170, 0, 255}, {255, 0, 255},
        {85, 0, 255},  {0, 0, 255},   {0, 0, 255},   {0, 0, 255},   {0, 255, 255}, {0, 255, 255},
    };
}

void RenderStyle::validate() const
{
    if (width == 0 || height == 0)
        throw UsageError("canvas dimensions must be positive");
    if (!(limb_thickness >= 0.0) || !(joint_radius >= 0.0))
        throw UsageError("limb thickness and joint radius must be non-negative");
    if (palette.size() != kLimbCount)
        throw UsageError("palette needs exactly " + std::to_string(kLimbCount) + " colors");
}

Rgb joint_color(const RenderStyle& style, std::size_t joint)
{
    for (std::size_t l = 0; l < kLimbCount; ++l) {
        if (kBody25Limbs[l].first == joint || kBody25Limbs[l].second == joint)
            return style.palette[l];
    }
    return style.palette.front();
}

Image render_frame(const PoseFrame& frame, CoordinateSpace space, double source_width, double source_height,
                   const RenderStyle& style)
{
    style.validate();
    const auto map = mapping_for(space, source_width, source_height, style);
    Image img(style.width, style.height, style.background);

    const double limb_radius = std::max(0.5 * style.limb_thickness, kMinRadius);
    for (std::size_t l = 0; l < kLimbCount; ++l) {
        const auto& a = frame[kBody25Limbs[l].first];
        const auto& b = frame[kBody25Limbs[l].second];
        if (a.missing() || b.missing())
            continue;
        stamp_segment(img, map(a), map(b), limb_radius, style.palette[l]);
    }
    if (style.joint_radius > 0.0) {
        const double r = std::max(style.joint_radius, kMinRadius);
        for (std::size_t j = 0; j < kJointCount; ++j) {
            if (frame[j].missing())
                continue;
            const auto p = map(frame[j]);
            stamp_segment(img, p, p, r, joint_color(style, j));
        }
    }
    return img;
}

std::vector<std::filesystem::path> render_sequence(const PoseSequence& seq, const RenderStyle& style,
                                                   const std::filesystem::path& out_dir, const RenderOptions& options)
{
    namespace fs = std::filesystem;
    style.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw DataError("cannot create output directory " + out_dir.string());

    const PoseSequence raw =
        seq.space() == CoordinateSpace::normalized ? denormalize(seq, seq.width(), seq.height()) : seq;

    std::vector<fs::path> paths;
    for (const auto& frame : raw.frames()) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06lld.png", static_cast<long long>(frame.frame_index()));
        paths.push_back(out_dir / name);
    }
    if (!options.overwrite) {
        for (const auto& p : paths) {
            if (fs::exists(p))
                throw DataError("refusing to overwrite existing " + p.string());
        }
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& frame = raw.frames()[i];
        write_png(paths[i], render_frame(frame, CoordinateSpace::raw_pixels, raw.width(), raw.height(), style));
    }
    return paths;
}

void write_png(const std::filesystem::path& path, const Image& image)
{
    if (image.rgb.size() != image.width * image.height * 3 || image.width == 0 || image.height == 0)
        throw UsageError("invalid image buffer");
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(image.width);
    desc.height = static_cast<png_uint_32>(image.height);
    desc.format = PNG_FORMAT_RGB;

    auto tmp = path;
    tmp += ".tmp";
    if (!png_image_write_to_file(&desc, tmp.c_str(), 0, image.rgb.data(), 0, nullptr)) {
        const std::string msg = desc.message;
        png_image_free(&desc);
        std::filesystem::remove(tmp);
        throw DataError("cannot write " + path.string() + ": " + msg);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot write " + path.string() + ": " + ec.message());
}

Image read_png(const std::filesystem::path& path)
{
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&desc, path.c_str()))
        throw DataError("cannot read " + path.string() + ": " + desc.message);
    desc.format = PNG_FORMAT_RGB;
    Image img(desc.width, desc.height, Rgb{});
    if (!png_image_finish_read(&desc, nullptr, img.rgb.data(), 0, nullptr)) {
        const std::string msg = desc.message;
        png_image_free(&desc);
        throw DataError("cannot decode " + path.string() + ": " + msg);
    }
    return img;
}

}  // namespace kprnn
