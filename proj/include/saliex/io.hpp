#pragma once

// PNG/JPEG decoding and PNG encoding on top of libpng and libjpeg.

#include <algorithm>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "saliex/error.hpp"
#include "saliex/image.hpp"
#include "saliex/imgcore.hpp"

namespace saliex::io {

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

inline void write_text(const fs::path& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

namespace detail {

struct PngReadBuffer {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
    auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
    if (buf->pos + len > buf->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, buf->data + buf->pos, len);
    buf->pos += len;
}

inline void png_write_mem(png_structp png, png_bytep in, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + len);
}

inline void png_flush_noop(png_structp) {}

// Benign ancillary-chunk complaints (e.g. odd iCCP profiles) are not errors.
inline void png_warn_ignore(png_structp, png_const_charp) {}

inline RasterImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn_ignore);
    if (!png) fail(ErrorCode::IoError, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    RasterImage img;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> rgba;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::IoError, "corrupt PNG " + name);
    }
    PngReadBuffer buf{bytes.data(), bytes.size(), 0};
    png_set_read_fn(png, &buf, png_read_mem);
    png_read_info(png, info);
    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    if (width < 1 || height < 1 || width > static_cast<png_uint_32>(kMaxSide) ||
        height > static_cast<png_uint_32>(kMaxSide)) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::InvalidDimension, "PNG dimensions out of range in " + name);
    }
    // Normalize every color type to 8-bit RGBA, then drop alpha.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_gray_to_rgb(png);
    png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
    png_read_update_info(png, info);
    rgba.resize(static_cast<std::size_t>(width) * height * 4);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = rgba.data() + static_cast<std::size_t>(y) * width * 4;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    img = RasterImage(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img[3 * i] = rgba[4 * i];
        img[3 * i + 1] = rgba[4 * i + 1];
        img[3 * i + 2] = rgba[4 * i + 2];
    }
    return img;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline RasterImage decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::string& name) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    std::vector<std::uint8_t> buffer;
    int width = 0;
    int height = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        fail(ErrorCode::IoError, "corrupt JPEG " + name + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide) {
        jpeg_destroy_decompress(&cinfo);
        fail(ErrorCode::InvalidDimension, "JPEG dimensions out of range in " + name);
    }
    buffer.resize(static_cast<std::size_t>(width) * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return RasterImage(width, height, std::move(buffer));
}

inline std::vector<std::uint8_t> encode_png_raw(int width, int height, int channels, const std::uint8_t* samples) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn_ignore);
    if (!png) fail(ErrorCode::IoError, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::IoError, "PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_write_mem, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(samples + static_cast<std::size_t>(y) * width * channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace detail

/// Decodes PNG or JPEG, sniffed by signature. Alpha is discarded.
inline RasterImage decode_image(const std::vector<std::uint8_t>& bytes, const std::string& name = "<memory>") {
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return detail::decode_png(bytes, name);
    if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff)
        return detail::decode_jpeg(bytes, name);
    fail(ErrorCode::IoError, "unsupported image format: " + name);
}

inline RasterImage read_image(const fs::path& path) { return decode_image(read_file(path), path.string()); }

inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    return detail::encode_png_raw(img.width(), img.height(), 3, img.raw().data());
}

inline std::vector<std::uint8_t> encode_png(const LuminanceImage& img) {
    return detail::encode_png_raw(img.width(), img.height(), 1, img.raw().data());
}

/// Maps are stored as 8-bit gray, value round(255 p).
inline std::vector<std::uint8_t> encode_png(const ProbabilityMap& map) { return encode_png(quantize_map(map)); }

/// Masks are stored as 8-bit gray 0/255.
inline std::vector<std::uint8_t> encode_png(const BinaryMask& mask) {
    LuminanceImage gray(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) gray[i] = mask[i] ? 255 : 0;
    return encode_png(gray);
}

template <typename ImageT>
void write_png(const fs::path& path, const ImageT& img) {
    write_file(path, encode_png(img));
}

/// Any nonzero luminance is foreground.
inline BinaryMask read_mask(const fs::path& path) {
    const RasterImage img = read_image(path);
    BinaryMask mask(img.width(), img.height());
    for (std::size_t i = 0; i < mask.pixel_count(); ++i)
        mask[i] = (img[3 * i] | img[3 * i + 1] | img[3 * i + 2]) != 0 ? 1 : 0;
    return mask;
}

} // namespace saliex::io
