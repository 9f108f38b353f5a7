#include "mrflp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mrflp/errors.hpp"

namespace mrflp {

long long Mask::count() const
{
    long long c = 0;
    for (auto b : bits) {
        c += b != 0;
    }
    return c;
}

Bytes read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInputError("cannot open '" + path + "'");
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const Bytes& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInputError("cannot write '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

struct Decoded {
    int width;
    int height;
    Bytes pixels;
};

Decoded decode(const Bytes& png, png_uint_32 format, int channels)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, png.data(), png.size())) {
        throw InvalidInputError(std::string("png decode: ") + image.message);
    }
    image.format = format;
    Decoded d{static_cast<int>(image.width), static_cast<int>(image.height), {}};
    d.pixels.resize(static_cast<std::size_t>(d.width) * d.height * channels);
    // Transparent pixels composite onto black for RGB/gray output.
    png_color background{0, 0, 0};
    if (!png_image_finish_read(&image, &background, d.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw InvalidInputError(std::string("png decode: ") + image.message);
    }
    if (d.width <= 0 || d.height <= 0) {
        throw InvalidInputError("png decode: empty image");
    }
    return d;
}

Bytes encode(const std::uint8_t* pixels, int width, int height, png_uint_32 format)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
        throw InvalidInputError(std::string("png encode: ") + image.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
        throw InvalidInputError(std::string("png encode: ") + image.message);
    }
    out.resize(size);
    return out;
}

void append_bytes(png_structp png, png_bytep data, png_size_t length)
{
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

RgbImage decode_png_rgb(const Bytes& png)
{
    const Decoded d = decode(png, PNG_FORMAT_RGB, 3);
    RgbImage img(d.width, d.height);
    for (std::size_t i = 0; i < d.pixels.size(); ++i) {
        img.data[i] = static_cast<float>(d.pixels[i]) / 255.0f;
    }
    return img;
}

RgbaImage decode_png_rgba(const Bytes& png)
{
    Decoded d = decode(png, PNG_FORMAT_RGBA, 4);
    return RgbaImage{d.width, d.height, std::move(d.pixels)};
}

Mask decode_png_mask(const Bytes& png)
{
    const Decoded d = decode(png, PNG_FORMAT_GRAY, 1);
    Mask m(d.width, d.height);
    for (std::size_t i = 0; i < d.pixels.size(); ++i) {
        m.bits[i] = d.pixels[i] != 0;
    }
    return m;
}

RgbImage read_png_rgb(const std::string& path) { return decode_png_rgb(read_file(path)); }
RgbaImage read_png_rgba(const std::string& path) { return decode_png_rgba(read_file(path)); }
Mask read_png_mask(const std::string& path) { return decode_png_mask(read_file(path)); }

Bytes encode_png_rgb(const RgbImage& image)
{
    Bytes px(image.data.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.data[i], 0.0f, 1.0f) * 255.0f));
    }
    return encode(px.data(), image.width, image.height, PNG_FORMAT_RGB);
}

Bytes encode_png_gray(const GrayImage& image)
{
    return encode(image.data.data(), image.width, image.height, PNG_FORMAT_GRAY);
}

Bytes encode_png_rgba(const RgbaImage& image)
{
    return encode(image.data.data(), image.width, image.height, PNG_FORMAT_RGBA);
}

namespace {

// Only trivially destructible locals live across setjmp here.
void write_gray1(Bytes& out, const Bytes& packed, int width, int height)
{
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw InvalidInputError("png encode: out of memory");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw InvalidInputError("png encode: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InvalidInputError("png encode: libpng error");
    }
    png_set_write_fn(png, &out, append_bytes, flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 1,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = (static_cast<std::size_t>(width) + 7) / 8;
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(packed.data() + y * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Bytes encode_png_mask(const Mask& mask)
{
    const std::size_t stride = (static_cast<std::size_t>(mask.width) + 7) / 8;
    Bytes packed(stride * mask.height, 0);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y)) {
                packed[y * stride + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
            }
        }
    }
    Bytes out;
    write_gray1(out, packed, mask.width, mask.height);
    return out;
}

}  // namespace mrflp
