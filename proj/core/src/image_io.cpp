#include "qae/image_io.hpp"

#include "qae/errors.hpp"
#include "qae/io_util.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>

namespace qae {

namespace {

constexpr char kMagic[4] = {'Q', 'I', 'M', 'G'};
constexpr std::uint64_t kMaxQimgValues = 1ull << 31;

} // namespace

std::vector<std::uint8_t> encode_qimg(const Tensor& image) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    le::put_u32(out, static_cast<std::uint32_t>(image.channels()));
    le::put_u32(out, static_cast<std::uint32_t>(image.height()));
    le::put_u32(out, static_cast<std::uint32_t>(image.width()));
    out.reserve(out.size() + 4 * image.size());
    for (double v : image.values()) le::put_f32(out, static_cast<float>(v));
    return out;
}

Tensor decode_qimg(std::span<const std::uint8_t> bytes) {
    le::Reader in(bytes, "QIMG");
    auto magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw FormatError("QIMG: bad magic");
    }
    const std::uint64_t c = in.u32(), h = in.u32(), w = in.u32();
    if (c * h * w > kMaxQimgValues) throw FormatError("QIMG: implausible dimensions");
    if (in.remaining() != 4 * c * h * w) {
        throw FormatError("QIMG: payload is " + std::to_string(in.remaining()) + " bytes, expected " +
                          std::to_string(4 * c * h * w));
    }
    Tensor t(Shape{c, h, w});
    for (double& v : t.values()) v = static_cast<double>(in.f32());
    return t;
}

void write_qimg(const std::filesystem::path& path, const Tensor& image) {
    write_file_atomic(path, encode_qimg(image));
}

Tensor read_qimg(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const std::runtime_error& e) {
        throw FormatError(e.what());
    }
    return decode_qimg(bytes);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void write_png16(const std::filesystem::path& path, const Image16& image) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        FilePtr fp(std::fopen(tmp.c_str(), "wb"));
        if (!fp) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw std::runtime_error("libpng: out of memory");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw std::runtime_error("libpng: failed writing " + path.string());
        }
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
                     16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<png_byte> row(image.width * 2);
        for (std::size_t y = 0; y < image.height; ++y) {
            for (std::size_t x = 0; x < image.width; ++x) {
                const std::uint16_t v = image.pixels[y * image.width + x];
                row[2 * x] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
                row[2 * x + 1] = static_cast<png_byte>(v & 0xFF);
            }
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::filesystem::rename(tmp, path);
}

Image16 read_png16(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG: cannot decode " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if ((color & PNG_COLOR_MASK_COLOR) != 0 || color == PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG: only grayscale images are supported");
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    Image16 img{h, w, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h)};
    std::vector<png_byte> row(rowbytes);
    for (std::size_t y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (std::size_t x = 0; x < w; ++x) {
            img.pixels[y * w + x] = depth == 16
                                        ? static_cast<std::uint16_t>(row[2 * x] << 8 | row[2 * x + 1])
                                        : static_cast<std::uint16_t>(row[x] * 257);
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Tensor image16_to_unit(const Image16& image) {
    Tensor t = Tensor::image(image.height, image.width);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) t[i] = image.pixels[i] / 65535.0;
    return t;
}

} // namespace qae
