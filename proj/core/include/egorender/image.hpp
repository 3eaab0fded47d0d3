#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ego {

// Interleaved float image, values nominally in [0,1].
struct ImageF {
    int width = 0, height = 0, channels = 0;
    std::vector<float> data;

    ImageF() = default;
    ImageF(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0.f) {}

    float& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
    float at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
    size_t size() const { return data.size(); }
};

struct ImageU8 {
    int width = 0, height = 0, channels = 0;
    std::vector<uint8_t> data;

    ImageU8() = default;
    ImageU8(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0) {}

    uint8_t& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
    uint8_t at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
};

struct ImageU16 {
    int width = 0, height = 0, channels = 0;
    std::vector<uint16_t> data;

    ImageU16() = default;
    ImageU16(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0) {}

    uint16_t& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
    uint16_t at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
};

ImageU8 quantize_u8(const ImageF& img);
ImageF dequantize(const ImageU8& img);

// PNG round-trips are byte-deterministic: fixed zlib level, filters off.
void save_png(const std::filesystem::path& path, const ImageU8& img);
void save_png(const std::filesystem::path& path, const ImageU16& img);
ImageU8 load_png8(const std::filesystem::path& path);
ImageU16 load_png16(const std::filesystem::path& path);

}  // namespace ego
