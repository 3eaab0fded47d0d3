#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "egorender/image.hpp"

namespace ego {

struct IUVImage;  // raster.hpp

// Grid-of-charts atlas: one S x S chart per part, 6 charts per grid row.
struct AtlasLayout {
    int part_count = 10;
    int chart_size = 64;
    int grid_cols = 6;

    int grid_rows() const { return (part_count + grid_cols - 1) / grid_cols; }
    int atlas_width() const { return grid_cols * chart_size; }
    int atlas_height() const { return grid_rows() * chart_size; }
    // pixel origin of the chart of a 1-based part index
    std::pair<int, int> chart_origin(int part) const {
        int k = part - 1;
        return {(k % grid_cols) * chart_size, (k / grid_cols) * chart_size};
    }
    bool operator==(const AtlasLayout&) const = default;
};

// Texture stack over the atlas. Scalar is float in production; the double
// instantiation backs the finite-difference gradient checks.
template <class Scalar>
struct TextureStackT {
    AtlasLayout layout;
    int channels = 0;
    std::vector<Scalar> data;           // atlas_h x atlas_w x C, interleaved
    std::vector<uint8_t> visibility;    // per texel; empty => implicitly all-visible

    TextureStackT() = default;
    TextureStackT(const AtlasLayout& l, int c)
        : layout(l), channels(c), data(size_t(l.atlas_width()) * l.atlas_height() * c, Scalar(0)) {}

    Scalar& at(int x, int y, int c) { return data[(size_t(y) * layout.atlas_width() + x) * channels + c]; }
    Scalar at(int x, int y, int c) const {
        return data[(size_t(y) * layout.atlas_width() + x) * channels + c];
    }
    bool visible(int x, int y) const {
        return visibility.empty() ? true : visibility[size_t(y) * layout.atlas_width() + x] != 0;
    }
    size_t texel_count() const { return size_t(layout.atlas_width()) * layout.atlas_height(); }
};

using TextureStack = TextureStackT<float>;
using TextureStackD = TextureStackT<double>;

// Splats each foreground pixel's color onto the nearest texel of its part
// chart; collisions keep the pixel with the smallest depth. A 1-texel gutter
// is replicated afterwards unless apply_gutter is false.
TextureStack extract_partial_texture(const ImageF& image, const IUVImage& iuv,
                                     const AtlasLayout& layout, bool apply_gutter = true);

// Per-texel mean of the extracted partial textures over records where the
// texel is visible; texels never seen default to mid-gray (0.5).
TextureStack init_implicit_stack(const std::vector<std::pair<const ImageF*, const IUVImage*>>& records,
                                 const AtlasLayout& layout);

// Channel concatenation (t_e first). Layouts must match.
TextureStack compose_global(const TextureStack& t_e, const TextureStack& t_m);

// Number of extract_partial_texture invocations since the last reset;
// used by the training-variant wiring assertions.
uint64_t extraction_call_count();
void reset_extraction_call_count();

void save_texture_stack(const std::filesystem::path& path, const TextureStack& stack);
TextureStack load_texture_stack(const std::filesystem::path& path);

// 8-bit preview of up to 3 channels (Fig.-5-style chart grid).
ImageU8 texture_preview(const TextureStack& stack, int first_channel = 0);

}  // namespace ego
