#include "egorender/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "egorender/common.hpp"

namespace ego {

ImageU8 quantize_u8(const ImageF& img) {
    ImageU8 out(img.width, img.height, img.channels);
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = img.data[i];
        v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
        out.data[i] = static_cast<uint8_t>(std::lround(v * 255.f));
    }
    return out;
}

ImageF dequantize(const ImageU8& img) {
    ImageF out(img.width, img.height, img.channels);
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = float(img.data[i]) / 255.f;
    return out;
}

namespace {

struct PngWriter {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngReader {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

void write_png_impl(const std::filesystem::path& path, int w, int h, int channels,
                    int bit_depth, const void* rows_base, size_t row_bytes) {
    PngWriter ctx;
    ctx.fp = std::fopen(path.string().c_str(), "wb");
    if (!ctx.fp) throw MissingArtifactError("cannot open for write: " + path.string());
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("png write failed: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    // Deterministic output: fixed compression settings, no filtering, no ancillary chunks.
    png_set_compression_level(ctx.png, 6);
    png_set_filter(ctx.png, 0, PNG_FILTER_NONE);
    int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(ctx.png, ctx.info, w, h, bit_depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    if (bit_depth == 16) png_set_swap(ctx.png);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(static_cast<const png_byte*>(rows_base) + size_t(y) * row_bytes);
    png_write_image(ctx.png, rows.data());
    png_write_end(ctx.png, nullptr);
}

void read_png_header(PngReader& ctx, const std::filesystem::path& path) {
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) throw MissingArtifactError("cannot open: " + path.string());
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("png read failed: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);
}

}  // namespace

void save_png(const std::filesystem::path& path, const ImageU8& img) {
    write_png_impl(path, img.width, img.height, img.channels, 8, img.data.data(),
                   size_t(img.width) * img.channels);
}

void save_png(const std::filesystem::path& path, const ImageU16& img) {
    write_png_impl(path, img.width, img.height, img.channels, 16, img.data.data(),
                   size_t(img.width) * img.channels * 2);
}

ImageU8 load_png8(const std::filesystem::path& path) {
    PngReader ctx;
    read_png_header(ctx, path);
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("png read failed: " + path.string());
    png_set_expand(ctx.png);
    png_set_strip_16(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);
    int w = png_get_image_width(ctx.png, ctx.info);
    int h = png_get_image_height(ctx.png, ctx.info);
    int c = png_get_channels(ctx.png, ctx.info);
    ImageU8 img(w, h, c);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = img.data.data() + size_t(y) * w * c;
    png_read_image(ctx.png, rows.data());
    return img;
}

ImageU16 load_png16(const std::filesystem::path& path) {
    PngReader ctx;
    read_png_header(ctx, path);
    if (setjmp(png_jmpbuf(ctx.png))) throw std::runtime_error("png read failed: " + path.string());
    if (png_get_bit_depth(ctx.png, ctx.info) != 16)
        throw std::runtime_error("expected 16-bit png: " + path.string());
    png_set_swap(ctx.png);
    png_read_update_info(ctx.png, ctx.info);
    int w = png_get_image_width(ctx.png, ctx.info);
    int h = png_get_image_height(ctx.png, ctx.info);
    int c = png_get_channels(ctx.png, ctx.info);
    ImageU16 img(w, h, c);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(img.data.data() + size_t(y) * w * c);
    png_read_image(ctx.png, rows.data());
    return img;
}

}  // namespace ego
