#include "supra/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "supra/fs.hpp"

namespace supra {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path.string());
    return bytes;
}

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

// Validates the signature and IHDR before handing the buffer to libpng so the
// caller gets a format error naming the exact unsupported property.
void check_header(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw FormatError(path.string() + ": not a PNG file");
    if (bytes.size() < 33) throw IoError(path.string() + ": truncated PNG header");
    if (std::memcmp(bytes.data() + 12, "IHDR", 4) != 0)
        throw FormatError(path.string() + ": first chunk is not IHDR");
    const int bit_depth = bytes[24];
    const int color_type = bytes[25];
    if (bit_depth != 8)
        throw FormatError(path.string() + ": unsupported bit depth " + std::to_string(bit_depth));
    switch (color_type) {
    case PNG_COLOR_TYPE_GRAY:
    case PNG_COLOR_TYPE_RGB:
        break;
    case PNG_COLOR_TYPE_PALETTE:
        throw FormatError(path.string() + ": unsupported color type palette");
    case PNG_COLOR_TYPE_GRAY_ALPHA:
        throw FormatError(path.string() + ": unsupported color type gray+alpha");
    case PNG_COLOR_TYPE_RGB_ALPHA:
        throw FormatError(path.string() + ": unsupported color type rgb+alpha");
    default:
        throw FormatError(path.string() + ": unknown color type " + std::to_string(color_type));
    }
    const auto w = be32(bytes.data() + 16);
    const auto h = be32(bytes.data() + 20);
    if (w == 0 || h == 0 || w > (1u << 15) || h > (1u << 15))
        throw FormatError(path.string() + ": unsupported dimensions " + std::to_string(w) + "x" + std::to_string(h));
}

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const unsigned char* data) {
    make_parent_directories(path);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, data, 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot write " + path.string() + ": " + msg);
    }
}

} // namespace

RgbImage load_png(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    check_header(bytes, path);

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": " + msg);
    }
    image.format = PNG_FORMAT_RGB;
    const int width = static_cast<int>(image.width);
    const int height = static_cast<int>(image.height);
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": " + msg);
    }

    RgbImage out(width, height);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    return out;
}

BinMask load_mask_png(const std::filesystem::path& path) {
    const auto rgb = load_png(path);
    BinMask out(rgb.width(), rgb.height());
    for (std::size_t i = 0; i < rgb.size(); ++i) out[i] = rgb[i].r >= 128 ? 1 : 0;
    return out;
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buffer(image.size() * 3);
    for (std::size_t i = 0; i < image.size(); ++i) {
        buffer[3 * i] = image[i].r;
        buffer[3 * i + 1] = image[i].g;
        buffer[3 * i + 2] = image[i].b;
    }
    write_png(path, image.width(), image.height(), PNG_FORMAT_RGB, buffer.data());
}

void save_png(const BinMask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buffer(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) buffer[i] = mask[i] ? 255 : 0;
    write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, buffer.data());
}

void save_png(const ProbMask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buffer(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double v = std::floor(std::clamp(mask[i], 0.0, 1.0) * 255.0 + 0.5);
        buffer[i] = static_cast<std::uint8_t>(v);
    }
    write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, buffer.data());
}

} // namespace supra
