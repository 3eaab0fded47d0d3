#include "egorender/texture.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "egorender/common.hpp"
#include "egorender/raster.hpp"

using nlohmann::json;

namespace ego {

namespace {
std::atomic<uint64_t> g_extraction_calls{0};

// dilate written texels by one (8-neighbourhood), within each chart
void replicate_gutter(TextureStack& stack) {
    const int aw = stack.layout.atlas_width();
    const int s = stack.layout.chart_size;
    std::vector<uint8_t> grown = stack.visibility;
    std::vector<float> grown_data = stack.data;
    for (int part = 1; part <= stack.layout.part_count; ++part) {
        auto [ox, oy] = stack.layout.chart_origin(part);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                size_t i = size_t(oy + y) * aw + (ox + x);
                if (stack.visibility[i]) continue;
                for (int dy = -1; dy <= 1 && !grown[i]; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= s || ny >= s) continue;
                        size_t nidx = size_t(oy + ny) * aw + (ox + nx);
                        if (!stack.visibility[nidx]) continue;
                        grown[i] = 1;
                        for (int c = 0; c < stack.channels; ++c)
                            grown_data[i * stack.channels + c] =
                                stack.data[nidx * stack.channels + c];
                        break;
                    }
            }
    }
    stack.visibility = std::move(grown);
    stack.data = std::move(grown_data);
}

}  // namespace

uint64_t extraction_call_count() { return g_extraction_calls.load(); }
void reset_extraction_call_count() { g_extraction_calls.store(0); }

TextureStack extract_partial_texture(const ImageF& image, const IUVImage& iuv,
                                     const AtlasLayout& layout, bool apply_gutter) {
    if (image.width != iuv.width || image.height != iuv.height)
        throw std::invalid_argument("extract_partial_texture: image/iuv dimension mismatch");
    if (iuv.part_count != layout.part_count)
        throw std::invalid_argument("extract_partial_texture: part count mismatch");
    g_extraction_calls.fetch_add(1, std::memory_order_relaxed);

    const int channels = image.channels;
    const int s = layout.chart_size;
    const int aw = layout.atlas_width();
    TextureStack stack(layout, channels);
    stack.visibility.assign(stack.texel_count(), 0);
    std::vector<float> best_depth(stack.texel_count(), std::numeric_limits<float>::infinity());
    std::vector<float> best_dist(stack.texel_count(), std::numeric_limits<float>::infinity());

    for (int y = 0; y < iuv.height; ++y)
        for (int x = 0; x < iuv.width; ++x) {
            size_t i = iuv.idx(x, y);
            int part = iuv.part[i];
            if (part == 0) continue;
            float fx = iuv.u[i] * s - 0.5f, fy = iuv.v[i] * s - 0.5f;
            int tx = std::clamp(int(std::lround(fx)), 0, s - 1);
            int ty = std::clamp(int(std::lround(fy)), 0, s - 1);
            auto [ox, oy] = layout.chart_origin(part);
            size_t t = size_t(oy + ty) * aw + (ox + tx);
            // smallest depth wins; exact depth ties go to the pixel nearest
            // the texel center
            float d2 = (fx - tx) * (fx - tx) + (fy - ty) * (fy - ty);
            if (iuv.depth[i] > best_depth[t] ||
                (iuv.depth[i] == best_depth[t] && d2 >= best_dist[t]))
                continue;
            best_depth[t] = iuv.depth[i];
            best_dist[t] = d2;
            stack.visibility[t] = 1;
            for (int c = 0; c < channels; ++c)
                stack.data[t * channels + c] = image.at(x, y, c);
        }

    if (apply_gutter) replicate_gutter(stack);
    return stack;
}

TextureStack init_implicit_stack(
    const std::vector<std::pair<const ImageF*, const IUVImage*>>& records,
    const AtlasLayout& layout) {
    if (records.empty()) throw std::invalid_argument("init_implicit_stack: empty record list");

    const int channels = records.front().first->channels;
    TextureStack out(layout, channels);
    std::vector<double> accum(out.texel_count() * channels, 0.0);
    std::vector<uint32_t> count(out.texel_count(), 0);

    for (const auto& [img, iuv] : records) {
        TextureStack te = extract_partial_texture(*img, *iuv, layout, /*apply_gutter=*/false);
        for (size_t t = 0; t < te.texel_count(); ++t) {
            if (!te.visibility[t]) continue;
            ++count[t];
            for (int c = 0; c < channels; ++c)
                accum[t * channels + c] += double(te.data[t * channels + c]);
        }
    }
    for (size_t t = 0; t < out.texel_count(); ++t)
        for (int c = 0; c < channels; ++c)
            out.data[t * channels + c] =
                count[t] ? float(accum[t * channels + c] / count[t]) : 0.5f;
    return out;
}

TextureStack compose_global(const TextureStack& t_e, const TextureStack& t_m) {
    if (!(t_e.layout == t_m.layout))
        throw std::invalid_argument("compose_global: layout mismatch");
    TextureStack out(t_e.layout, t_e.channels + t_m.channels);
    for (size_t t = 0; t < out.texel_count(); ++t) {
        for (int c = 0; c < t_e.channels; ++c)
            out.data[t * out.channels + c] = t_e.data[t * t_e.channels + c];
        for (int c = 0; c < t_m.channels; ++c)
            out.data[t * out.channels + t_e.channels + c] = t_m.data[t * t_m.channels + c];
    }
    return out;
}

namespace {
constexpr char kTexMagic[8] = {'E', 'G', 'R', 'T', 'E', 'X', '1', '\0'};
}

void save_texture_stack(const std::filesystem::path& path, const TextureStack& stack) {
    json header;
    header["version"] = 1;
    header["part_count"] = stack.layout.part_count;
    header["chart_size"] = stack.layout.chart_size;
    header["grid_cols"] = stack.layout.grid_cols;
    header["channels"] = stack.channels;
    header["has_visibility"] = !stack.visibility.empty();
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingArtifactError("cannot write texture stack: " + path.string());
    out.write(kTexMagic, 8);
    uint32_t hlen = uint32_t(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(htext.data(), std::streamsize(htext.size()));
    out.write(reinterpret_cast<const char*>(stack.data.data()),
              std::streamsize(stack.data.size() * sizeof(float)));
    if (!stack.visibility.empty()) {
        // packed bitmask
        std::vector<uint8_t> bits((stack.texel_count() + 7) / 8, 0);
        for (size_t i = 0; i < stack.texel_count(); ++i)
            if (stack.visibility[i]) bits[i / 8] |= uint8_t(1u << (i % 8));
        out.write(reinterpret_cast<const char*>(bits.data()), std::streamsize(bits.size()));
    }
}

TextureStack load_texture_stack(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open texture stack: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kTexMagic, 8) != 0)
        throw std::runtime_error("texture stack: bad magic: " + path.string());
    uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    json header = json::parse(htext);

    AtlasLayout layout;
    layout.part_count = header.at("part_count").get<int>();
    layout.chart_size = header.at("chart_size").get<int>();
    layout.grid_cols = header.at("grid_cols").get<int>();
    TextureStack stack(layout, header.at("channels").get<int>());
    in.read(reinterpret_cast<char*>(stack.data.data()),
            std::streamsize(stack.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("texture stack: truncated texel block");
    if (header.at("has_visibility").get<bool>()) {
        std::vector<uint8_t> bits((stack.texel_count() + 7) / 8);
        in.read(reinterpret_cast<char*>(bits.data()), std::streamsize(bits.size()));
        if (!in) throw std::runtime_error("texture stack: truncated visibility block");
        stack.visibility.assign(stack.texel_count(), 0);
        for (size_t i = 0; i < stack.texel_count(); ++i)
            stack.visibility[i] = (bits[i / 8] >> (i % 8)) & 1u;
    }
    return stack;
}

ImageU8 texture_preview(const TextureStack& stack, int first_channel) {
    ImageU8 img(stack.layout.atlas_width(), stack.layout.atlas_height(), 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                int ch = first_channel + c;
                float v = ch < stack.channels ? stack.at(x, y, ch) : 0.f;
                v = std::clamp(v, 0.f, 1.f);
                img.at(x, y, c) = uint8_t(std::lround(v * 255.f));
            }
    return img;
}

}  // namespace ego
