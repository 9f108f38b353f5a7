#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mrflp {

/// Row-major RGB image with channels in [0, 1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // 3 * width * height

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(3 * static_cast<std::size_t>(w) * h, 0.0f) {}

    int pixel_count() const noexcept { return width * height; }
    float& at(int x, int y, int c) { return data[3 * (static_cast<std::size_t>(y) * width + x) + c]; }
    float at(int x, int y, int c) const
    {
        return data[3 * (static_cast<std::size_t>(y) * width + x) + c];
    }
};

/// 8-bit RGBA overlay, used for scribbles.
struct RgbaImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // 4 * width * height
};

/// Binary mask, one byte (0 or 1) per pixel.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    long long count() const;
    friend bool operator==(const Mask&, const Mask&) = default;
};

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
};

using Bytes = std::vector<std::uint8_t>;

// Readers throw InvalidInputError on unreadable or undecodable input.
RgbImage read_png_rgb(const std::string& path);
RgbImage decode_png_rgb(const Bytes& png);
RgbaImage read_png_rgba(const std::string& path);
RgbaImage decode_png_rgba(const Bytes& png);
/// Any PNG; a pixel is set when its gray value is nonzero.
Mask read_png_mask(const std::string& path);
Mask decode_png_mask(const Bytes& png);

Bytes encode_png_rgb(const RgbImage& image);
Bytes encode_png_gray(const GrayImage& image);
Bytes encode_png_rgba(const RgbaImage& image);
/// 1-bit grayscale PNG.
Bytes encode_png_mask(const Mask& mask);

void write_file(const std::string& path, const Bytes& bytes);
Bytes read_file(const std::string& path);

}  // namespace mrflp
