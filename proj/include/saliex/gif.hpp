#pragma once

// Minimal GIF89a writer (global palette, LZW, looping extension) and a
// matching reader used to check round trips.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "saliex/error.hpp"
#include "saliex/image.hpp"

namespace saliex::gif {

using Palette = std::array<Rgb, 256>;

/// Fixed 6x7x6 color cube (252 colors), padded with black to 256 entries.
inline const Palette& uniform_palette() {
    static const Palette palette = [] {
        Palette p{};
        std::size_t k = 0;
        for (int r = 0; r < 6; ++r)
            for (int g = 0; g < 7; ++g)
                for (int b = 0; b < 6; ++b)
                    p[k++] = {static_cast<std::uint8_t>((r * 255 + 2) / 5), static_cast<std::uint8_t>((g * 255 + 3) / 6),
                              static_cast<std::uint8_t>((b * 255 + 2) / 5)};
        return p;
    }();
    return palette;
}

inline std::uint8_t uniform_index(Rgb c) noexcept {
    const int r = (c[0] * 5 + 127) / 255;
    const int g = (c[1] * 6 + 127) / 255;
    const int b = (c[2] * 5 + 127) / 255;
    return static_cast<std::uint8_t>((r * 7 + g) * 6 + b);
}

inline RasterImage quantize_uniform(const RasterImage& img) {
    RasterImage out(img.width(), img.height());
    const auto& pal = uniform_palette();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const Rgb q = pal[uniform_index({img[3 * i], img[3 * i + 1], img[3 * i + 2]})];
        out[3 * i] = q[0];
        out[3 * i + 1] = q[1];
        out[3 * i + 2] = q[2];
    }
    return out;
}

namespace detail {

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put(unsigned code, int bits) {
        acc_ |= static_cast<std::uint32_t>(code) << nbits_;
        nbits_ += bits;
        while (nbits_ >= 8) {
            push(static_cast<std::uint8_t>(acc_ & 0xff));
            acc_ >>= 8;
            nbits_ -= 8;
        }
    }

    void finish() {
        if (nbits_ > 0) push(static_cast<std::uint8_t>(acc_ & 0xff));
        acc_ = 0;
        nbits_ = 0;
        flush_block();
        out_.push_back(0); // block terminator
    }

private:
    void push(std::uint8_t byte) {
        block_.push_back(byte);
        if (block_.size() == 255) flush_block();
    }
    void flush_block() {
        if (block_.empty()) return;
        out_.push_back(static_cast<std::uint8_t>(block_.size()));
        out_.insert(out_.end(), block_.begin(), block_.end());
        block_.clear();
    }

    std::vector<std::uint8_t>& out_;
    std::vector<std::uint8_t> block_;
    std::uint32_t acc_ = 0;
    int nbits_ = 0;
};

inline void put_u16(std::vector<std::uint8_t>& out, unsigned v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

/// LZW-compresses 8-bit indices into GIF sub-blocks.
inline void lzw_encode(const std::vector<std::uint8_t>& indices, std::vector<std::uint8_t>& out) {
    constexpr int kMinCodeSize = 8;
    constexpr unsigned kClear = 1u << kMinCodeSize;
    constexpr unsigned kEnd = kClear + 1;
    out.push_back(kMinCodeSize);
    BitWriter bits(out);

    // next[code * 256 + byte] = extended code, 0 when absent
    std::vector<std::uint16_t> next(4096u * 256u, 0);
    int code_size = kMinCodeSize + 1;
    unsigned max_code = kEnd;
    bits.put(kClear, code_size);
    if (indices.empty()) {
        bits.put(kEnd, code_size);
        bits.finish();
        return;
    }
    unsigned cur = indices[0];
    for (std::size_t i = 1; i < indices.size(); ++i) {
        const std::uint8_t byte = indices[i];
        const std::uint16_t ext = next[cur * 256u + byte];
        if (ext != 0) {
            cur = ext;
            continue;
        }
        bits.put(cur, code_size);
        next[cur * 256u + byte] = static_cast<std::uint16_t>(++max_code);
        if (max_code >= (1u << code_size) && code_size < 12) ++code_size;
        if (max_code == 4095) {
            bits.put(kClear, code_size);
            std::fill(next.begin(), next.end(), 0);
            code_size = kMinCodeSize + 1;
            max_code = kEnd;
        }
        cur = byte;
    }
    bits.put(cur, code_size);
    // The reader adds one more table entry after the last code.
    if (max_code + 1 >= (1u << code_size) && code_size < 12) ++code_size;
    bits.put(kEnd, code_size);
    bits.finish();
}

} // namespace detail

struct AnimationOptions {
    int delay_cs = 10;
    int loop_count = 0; // 0 = forever
};

/// Encodes equally sized RGB frames against the uniform palette.
inline std::vector<std::uint8_t> encode_animation(const std::vector<RasterImage>& frames, const AnimationOptions& opt = {}) {
    if (frames.empty()) fail(ErrorCode::InvalidValue, "animation needs at least one frame");
    const int w = frames.front().width();
    const int h = frames.front().height();
    for (const auto& f : frames)
        if (f.width() != w || f.height() != h) fail(ErrorCode::DimensionMismatch, "animation frames differ in size");

    std::vector<std::uint8_t> out;
    const std::string header = "GIF89a";
    out.insert(out.end(), header.begin(), header.end());
    detail::put_u16(out, static_cast<unsigned>(w));
    detail::put_u16(out, static_cast<unsigned>(h));
    out.push_back(0xF7); // global table, 8-bit color resolution, 256 entries
    out.push_back(0);
    out.push_back(0);
    for (const auto& c : uniform_palette()) out.insert(out.end(), c.begin(), c.end());

    const std::string app = "NETSCAPE2.0";
    out.insert(out.end(), {0x21, 0xFF, 0x0B});
    out.insert(out.end(), app.begin(), app.end());
    out.insert(out.end(), {0x03, 0x01});
    detail::put_u16(out, static_cast<unsigned>(opt.loop_count));
    out.push_back(0);

    std::vector<std::uint8_t> indices(static_cast<std::size_t>(w) * h);
    for (const auto& f : frames) {
        out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04}); // disposal: leave in place
        detail::put_u16(out, static_cast<unsigned>(opt.delay_cs));
        out.insert(out.end(), {0x00, 0x00});
        out.push_back(0x2C);
        detail::put_u16(out, 0);
        detail::put_u16(out, 0);
        detail::put_u16(out, static_cast<unsigned>(w));
        detail::put_u16(out, static_cast<unsigned>(h));
        out.push_back(0);
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = uniform_index({f[3 * i], f[3 * i + 1], f[3 * i + 2]});
        detail::lzw_encode(indices, out);
    }
    out.push_back(0x3B);
    return out;
}

// ---------------------------------------------------------------------------

struct Animation {
    int width = 0;
    int height = 0;
    int loop_count = -1; // -1 when no looping extension is present
    std::vector<int> delays_cs;
    std::vector<RasterImage> frames; // composited full-canvas frames
};

namespace detail {

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& data) : data_(data) {}
    std::uint8_t u8() {
        if (pos_ >= data_.size()) fail(ErrorCode::ParseError, "truncated GIF");
        return data_[pos_++];
    }
    unsigned u16() {
        const unsigned lo = u8();
        return lo | (static_cast<unsigned>(u8()) << 8);
    }
    std::vector<std::uint8_t> bytes(std::size_t n) {
        if (pos_ + n > data_.size()) fail(ErrorCode::ParseError, "truncated GIF");
        std::vector<std::uint8_t> v(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                    data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return v;
    }
    std::vector<std::uint8_t> sub_blocks() {
        std::vector<std::uint8_t> v;
        for (std::uint8_t len = u8(); len != 0; len = u8()) {
            auto b = bytes(len);
            v.insert(v.end(), b.begin(), b.end());
        }
        return v;
    }

private:
    const std::vector<std::uint8_t>& data_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> lzw_decode(int min_code_size, const std::vector<std::uint8_t>& data, std::size_t expected) {
    if (min_code_size < 2 || min_code_size > 11) fail(ErrorCode::ParseError, "bad LZW code size");
    const unsigned clear = 1u << min_code_size;
    const unsigned end = clear + 1;
    std::vector<std::uint16_t> prefix(4096);
    std::vector<std::uint8_t> suffix(4096);
    std::vector<std::uint8_t> first(4096);
    for (unsigned c = 0; c < clear; ++c) {
        suffix[c] = static_cast<std::uint8_t>(c);
        first[c] = static_cast<std::uint8_t>(c);
    }
    std::vector<std::uint8_t> out;
    out.reserve(expected);
    std::vector<std::uint8_t> stack;

    int code_size = min_code_size + 1;
    unsigned next_free = end + 1;
    int prev = -1;
    std::size_t bitpos = 0;
    const std::size_t total_bits = data.size() * 8;
    while (bitpos + static_cast<std::size_t>(code_size) <= total_bits) {
        unsigned code = 0;
        for (int b = 0; b < code_size; ++b, ++bitpos)
            code |= static_cast<unsigned>((data[bitpos / 8] >> (bitpos % 8)) & 1u) << b;
        if (code == clear) {
            code_size = min_code_size + 1;
            next_free = end + 1;
            prev = -1;
            continue;
        }
        if (code == end) break;
        if (prev < 0) {
            if (code >= clear) fail(ErrorCode::ParseError, "LZW stream starts with a non-literal");
            out.push_back(static_cast<std::uint8_t>(code));
            prev = static_cast<int>(code);
            continue;
        }
        unsigned walk = code;
        std::uint8_t head = 0;
        if (code < next_free) {
            head = first[code];
        } else if (code == next_free) {
            head = first[static_cast<std::size_t>(prev)];
        } else {
            fail(ErrorCode::ParseError, "invalid LZW code");
        }
        if (next_free < 4096) {
            prefix[next_free] = static_cast<std::uint16_t>(prev);
            suffix[next_free] = head;
            first[next_free] = first[static_cast<std::size_t>(prev)];
            ++next_free;
            if (next_free == (1u << code_size) && code_size < 12) ++code_size;
        }
        stack.clear();
        while (walk >= clear) {
            stack.push_back(suffix[walk]);
            walk = prefix[walk];
        }
        stack.push_back(static_cast<std::uint8_t>(walk));
        out.insert(out.end(), stack.rbegin(), stack.rend());
        prev = static_cast<int>(code);
    }
    return out;
}

inline std::vector<Rgb> read_color_table(Reader& r, int size_bits) {
    std::vector<Rgb> table(static_cast<std::size_t>(1) << (size_bits + 1));
    for (auto& c : table) c = {r.u8(), r.u8(), r.u8()};
    return table;
}

} // namespace detail

inline Animation decode_animation(const std::vector<std::uint8_t>& data) {
    detail::Reader r(data);
    const auto sig = r.bytes(6);
    if (std::string(sig.begin(), sig.end()) != "GIF89a" && std::string(sig.begin(), sig.end()) != "GIF87a")
        fail(ErrorCode::ParseError, "not a GIF stream");
    Animation anim;
    anim.width = static_cast<int>(r.u16());
    anim.height = static_cast<int>(r.u16());
    const std::uint8_t packed = r.u8();
    r.u8();
    r.u8();
    std::vector<Rgb> global;
    if (packed & 0x80) global = detail::read_color_table(r, packed & 0x07);

    RasterImage canvas(anim.width, anim.height);
    int delay = 0;
    for (;;) {
        const std::uint8_t tag = r.u8();
        if (tag == 0x3B) break;
        if (tag == 0x21) {
            const std::uint8_t label = r.u8();
            auto body = r.sub_blocks();
            if (label == 0xF9 && body.size() >= 3) delay = body[1] | (body[2] << 8);
            if (label == 0xFF && body.size() >= 14 && std::string(body.begin(), body.begin() + 11) == "NETSCAPE2.0")
                anim.loop_count = body[12] | (body[13] << 8);
            continue;
        }
        if (tag != 0x2C) fail(ErrorCode::ParseError, "unexpected GIF block");
        const int left = static_cast<int>(r.u16());
        const int top = static_cast<int>(r.u16());
        const int fw = static_cast<int>(r.u16());
        const int fh = static_cast<int>(r.u16());
        const std::uint8_t ipacked = r.u8();
        std::vector<Rgb> table = global;
        if (ipacked & 0x80) table = detail::read_color_table(r, ipacked & 0x07);
        if (ipacked & 0x40) fail(ErrorCode::ParseError, "interlaced GIF frames are not supported");
        const int min_code = r.u8();
        const auto indices =
            detail::lzw_decode(min_code, r.sub_blocks(), static_cast<std::size_t>(fw) * static_cast<std::size_t>(fh));
        if (indices.size() < static_cast<std::size_t>(fw) * static_cast<std::size_t>(fh))
            fail(ErrorCode::ParseError, "GIF frame has too few pixels");
        for (int y = 0; y < fh; ++y)
            for (int x = 0; x < fw; ++x) {
                const auto idx = indices[static_cast<std::size_t>(y) * fw + x];
                if (idx >= table.size()) fail(ErrorCode::ParseError, "color index outside palette");
                if (canvas.contains(left + x, top + y)) set_pixel(canvas, left + x, top + y, table[idx]);
            }
        anim.frames.push_back(canvas);
        anim.delays_cs.push_back(delay);
    }
    return anim;
}

} // namespace saliex::gif
