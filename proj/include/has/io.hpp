#pragma once

// PGM (P2/P5) and PNG reading/writing for GrayImage, plus colored label-map
// rendering. PNG goes through libpng; link against PNG::PNG.

#include <png.h>

#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "has/error.hpp"
#include "has/image.hpp"

namespace has {

struct Rgb {
    std::uint8_t r, g, b;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Fixed label palette; entry i colors region i. Listed in README.
inline constexpr std::array<Rgb, 16> kLabelPalette{{
    {31, 119, 180},  {44, 160, 44},   {214, 39, 40},   {255, 127, 14},
    {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
    {188, 189, 34},  {23, 190, 207},  {0, 0, 0},       {255, 255, 255},
    {255, 255, 0},   {0, 128, 128},   {128, 0, 0},     {0, 0, 128},
}};

/// Integer luma: round(0.299 R + 0.587 G + 0.114 B).
constexpr Intensity luma(int r, int g, int b) noexcept {
    return static_cast<Intensity>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorCode::file_not_found, "no such file", path);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_failure, "cannot open for reading", path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- PGM

class PgmCursor {
public:
    PgmCursor(const std::vector<unsigned char>& data, const std::string& path) : data_(data), path_(path) {}

    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (std::isspace(data_[pos_])) {
                ++pos_;
            } else if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        if (pos_ >= data_.size() || !std::isdigit(data_[pos_]))
            throw Error(ErrorCode::corrupt_header, std::string("expected ") + what, path_);
        unsigned long value = 0;
        while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
            value = value * 10 + (data_[pos_] - '0');
            if (value > 0xFFFFFFFFul)
                throw Error(ErrorCode::corrupt_header, std::string(what) + " out of range", path_);
            ++pos_;
        }
        return value;
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

private:
    const std::vector<unsigned char>& data_;
    const std::string& path_;
    std::size_t pos_ = 2;
};

// maxval <= 255 samples are taken as-is; wider samples are right-shifted to 8 bits.
inline Intensity narrow_sample(unsigned long v, unsigned long maxval) {
    return maxval > 255 ? static_cast<Intensity>(v >> 8) : static_cast<Intensity>(v);
}

inline GrayImage decode_pgm(const std::vector<unsigned char>& data, const std::string& path) {
    const bool ascii = data[1] == '2';
    PgmCursor cur(data, path);
    const unsigned long width = cur.number("width");
    const unsigned long height = cur.number("height");
    const unsigned long maxval = cur.number("maxval");
    if (width == 0 || height == 0)
        throw Error(ErrorCode::corrupt_header, "zero image dimension", path);
    if (maxval == 0 || maxval > 65535)
        throw Error(ErrorCode::corrupt_header, "maxval must be in [1, 65535]", path);

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<Intensity> pixels(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned long v = cur.number("pixel value");
            if (v > maxval)
                throw Error(ErrorCode::corrupt_header, "pixel value exceeds maxval", path);
            pixels[i] = narrow_sample(v, maxval);
        }
    } else {
        // exactly one whitespace byte separates maxval from the raster
        if (cur.pos() >= data.size() || !std::isspace(data[cur.pos()]))
            throw Error(ErrorCode::corrupt_header, "missing raster separator", path);
        cur.advance(1);
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (data.size() - cur.pos() < count * bytes_per)
            throw Error(ErrorCode::corrupt_header, "raster shorter than header dimensions", path);
        const unsigned char* raster = data.data() + cur.pos();
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned long v =
                bytes_per == 2 ? (static_cast<unsigned long>(raster[2 * i]) << 8) | raster[2 * i + 1] : raster[i];
            if (v > maxval)
                throw Error(ErrorCode::corrupt_header, "pixel value exceeds maxval", path);
            pixels[i] = narrow_sample(v, maxval);
        }
    }
    return GrayImage(width, height, std::move(pixels));
}

inline void write_bytes(const std::string& path, const std::string& header, std::span<const unsigned char> body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io_failure, "cannot open for writing", path);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    if (!out)
        throw Error(ErrorCode::io_failure, "write failed", path);
}

// ---------------------------------------------------------------- PNG

struct PngErrorState {
    std::jmp_buf jump;
    char message[256] = {};
};

extern "C" inline void png_error_to_jump(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof state->message, "%s", msg ? msg : "libpng error");
    std::longjmp(state->jump, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

struct PngMemoryReader {
    const std::vector<unsigned char>* data;
    std::size_t pos;
};

extern "C" inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
    auto* src = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
    if (src->pos + length > src->data->size())
        png_error(png, "unexpected end of PNG data");
    std::memcpy(out, src->data->data() + src->pos, length);
    src->pos += length;
}

// Decodes into 8-bit RGB or gray rows. Returns the channel count (1 or 3).
// Everything with a destructor lives in the caller; only trivially
// destructible state is touched between setjmp and longjmp.
inline int decode_png_raw(const std::vector<unsigned char>& data, std::vector<unsigned char>& raster,
                          png_uint_32& width, png_uint_32& height, PngErrorState& err) {
    PngMemoryReader reader{&data, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_jump, png_warning_ignore);
    if (!png)
        return -1;
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows;
    int channels = -1;
    if (setjmp(err.jump)) {
        png_destroy_read_struct(&png, &info, nullptr);
        return -2;
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (depth == 16)
        png_set_strip_16(png); // high byte, i.e. a right shift by 8
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    raster.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = raster.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return channels;
}

inline GrayImage decode_png(const std::vector<unsigned char>& data, const std::string& path) {
    std::vector<unsigned char> raster;
    png_uint_32 width = 0, height = 0;
    PngErrorState err;
    const int channels = decode_png_raw(data, raster, width, height, err);
    if (channels == -1)
        throw Error(ErrorCode::io_failure, "libpng initialisation failed", path);
    if (channels == -2)
        throw Error(ErrorCode::corrupt_header, err.message, path);
    if (channels != 1 && channels != 3)
        throw Error(ErrorCode::unsupported_format, "unexpected PNG channel layout", path);
    if (width == 0 || height == 0)
        throw Error(ErrorCode::corrupt_header, "zero image dimension", path);

    std::vector<Intensity> pixels(static_cast<std::size_t>(width) * height);
    if (channels == 1) {
        std::copy(raster.begin(), raster.begin() + static_cast<std::ptrdiff_t>(pixels.size()), pixels.begin());
    } else {
        for (std::size_t i = 0; i < pixels.size(); ++i)
            pixels[i] = luma(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]);
    }
    return GrayImage(width, height, std::move(pixels));
}

struct PngWriteSink {
    std::vector<unsigned char> bytes;
};

extern "C" inline void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
    auto* sink = static_cast<PngWriteSink*>(png_get_io_ptr(png));
    sink->bytes.insert(sink->bytes.end(), data, data + length);
}

extern "C" inline void png_flush_noop(png_structp) {}

inline bool encode_png_raw(const unsigned char* raster, std::size_t width, std::size_t height, int channels,
                           PngWriteSink& sink, PngErrorState& err) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_jump, png_warning_ignore);
    if (!png)
        return false;
    png_infop info = png_create_info_struct(png);
    if (setjmp(err.jump)) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &sink, png_write_to_memory, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = width * static_cast<std::size_t>(channels);
    for (std::size_t y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(raster + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

inline void write_png(const std::string& path, std::span<const unsigned char> raster, std::size_t width,
                      std::size_t height, int channels) {
    PngWriteSink sink;
    PngErrorState err;
    if (!encode_png_raw(raster.data(), width, height, channels, sink, err))
        throw Error(ErrorCode::io_failure, err.message[0] ? err.message : "PNG encoding failed", path);
    write_bytes(path, {}, sink.bytes);
}

} // namespace detail

/// Reads a PGM (P2/P5) or PNG file into an 8-bit grayscale image. The format
/// is detected from the file's magic bytes. Color PNGs are reduced with the
/// integer luma formula, 16-bit samples are right-shifted to 8 bits.
inline GrayImage load_image(const std::string& path) {
    const auto data = detail::read_file(path);
    static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (data.size() >= 8 && std::memcmp(data.data(), png_magic, 8) == 0)
        return detail::decode_png(data, path);
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5'))
        return detail::decode_pgm(data, path);
    if (data.size() >= 2 && data[0] == 'P' && data[1] >= '1' && data[1] <= '7')
        throw Error(ErrorCode::unsupported_format, "only grayscale PGM (P2/P5) is supported", path);
    throw Error(ErrorCode::unsupported_format, "not a PGM or PNG file", path);
}

/// Reads a PNG as RGB triples (gray inputs replicate the gray value). Used to
/// inspect rendered label maps.
inline std::vector<Rgb> load_rgb(const std::string& path, std::size_t* width = nullptr,
                                 std::size_t* height = nullptr) {
    const auto data = detail::read_file(path);
    std::vector<unsigned char> raster;
    png_uint_32 w = 0, h = 0;
    detail::PngErrorState err;
    const int channels = detail::decode_png_raw(data, raster, w, h, err);
    if (channels < 0)
        throw Error(ErrorCode::corrupt_header, err.message, path);
    std::vector<Rgb> out(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (channels == 1)
            out[i] = {raster[i], raster[i], raster[i]};
        else
            out[i] = {raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]};
    }
    if (width)
        *width = w;
    if (height)
        *height = h;
    return out;
}

/// Writes PGM P5 for .pgm/.pnm, 8-bit grayscale PNG for .png.
inline void save_image(const GrayImage& img, const std::string& path) {
    const std::string ext = detail::lower_extension(path);
    if (ext == ".pgm" || ext == ".pnm") {
        const std::string header =
            "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
        detail::write_bytes(path, header, img.pixels());
    } else if (ext == ".png") {
        detail::write_png(path, img.pixels(), img.width(), img.height(), 1);
    } else {
        throw Error(ErrorCode::unsupported_format, "output extension must be .pgm or .png", path);
    }
}

/// `out.png` -> `out.regions.txt`.
inline std::string regions_sidecar_path(const std::string& png_path) {
    std::filesystem::path p(png_path);
    p.replace_extension(".regions.txt");
    return p.string();
}

inline std::string format_regions(const LabelMap& labels) {
    std::ostringstream out;
    for (std::size_t i = 0; i < labels.regions.size(); ++i) {
        const Region& r = labels.regions.regions[i];
        out << i << ' ' << r.lower << ' ' << r.upper << ' ' << r.peak << '\n';
    }
    return out.str();
}

/// Renders labels through kLabelPalette as an RGB PNG and writes the region
/// intervals next to it (one `label lower upper peak` line per region).
inline void save_label_map(const LabelMap& labels, const std::string& path) {
    if (labels.region_count > kLabelPalette.size())
        throw Error(ErrorCode::too_many_regions,
                    std::to_string(labels.region_count) + " regions, palette holds " +
                        std::to_string(kLabelPalette.size()),
                    path);
    std::vector<unsigned char> rgb(labels.labels.size() * 3);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const std::uint16_t l = labels.labels[i];
        if (l >= kLabelPalette.size())
            throw Error(ErrorCode::too_many_regions, "label index " + std::to_string(l) + " has no color", path);
        const Rgb c = kLabelPalette[l];
        rgb[3 * i] = c.r;
        rgb[3 * i + 1] = c.g;
        rgb[3 * i + 2] = c.b;
    }
    detail::write_png(path, rgb, labels.width, labels.height, 3);
    const std::string text = format_regions(labels);
    detail::write_bytes(regions_sidecar_path(path), text, {});
}

} // namespace has
