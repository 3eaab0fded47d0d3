#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "egorender/body.hpp"
#include "egorender/geometry.hpp"
#include "egorender/texture.hpp"

namespace ego {

// Per-pixel dense correspondence: part index (0 = background), chart UV,
// and depth (+inf at background).
struct IUVImage {
    int width = 0, height = 0, part_count = 0;
    std::vector<uint16_t> part;
    std::vector<float> u, v;
    std::vector<float> depth;

    static IUVImage background(int w, int h, int parts) {
        IUVImage img;
        img.width = w;
        img.height = h;
        img.part_count = parts;
        img.part.assign(size_t(w) * h, 0);
        img.u.assign(size_t(w) * h, 0.f);
        img.v.assign(size_t(w) * h, 0.f);
        img.depth.assign(size_t(w) * h, std::numeric_limits<float>::infinity());
        return img;
    }

    size_t idx(int x, int y) const { return size_t(y) * width + x; }
    bool foreground(int x, int y) const { return part[idx(x, y)] != 0; }
    size_t pixel_count() const { return size_t(width) * height; }
};

template <class Scalar>
struct FeatureImageT {
    int width = 0, height = 0, channels = 0;
    std::vector<Scalar> data;

    FeatureImageT() = default;
    FeatureImageT(int w, int h, int c)
        : width(w), height(h), channels(c), data(size_t(w) * h * c, Scalar(0)) {}

    Scalar& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
    Scalar at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
};

using FeatureImage = FeatureImageT<float>;
using FeatureImageD = FeatureImageT<double>;

struct RasterOptions {
    // Posed-edge bound enforced under fisheye projection (screen-linear
    // interpolation is only accurate for small triangles).
    double max_edge_m = 0.08;
    // Fragments closer than this are discarded (0 disables the near clip).
    double near_m = 0.0;
};

// Z-buffered rasterization of a posed mesh. `positions` are world-space,
// indexed by the mesh's faces; UV interpolation is perspective-correct for
// pinhole cameras and screen-linear for fisheye.
IUVImage rasterize(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh,
                   const PinholeCamera& cam, const RasterOptions& opts = {});
IUVImage rasterize(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh,
                   const FisheyeCamera& cam, const RasterOptions& opts = {});

namespace detail {
extern std::atomic<uint64_t> feature_render_calls;

template <class Scalar>
struct BilinearTap {
    int x0, y0, x1, y1;
    Scalar w00, w01, w10, w11;
};

// Chart-interior bilinear footprint for chart UV in [0,1]^2. Texel (i,j)
// centers sit at ((i+0.5)/S, (j+0.5)/S); coordinates clamp to the chart so
// sampling never crosses into a neighbouring chart.
template <class Scalar>
BilinearTap<Scalar> bilinear_tap(const AtlasLayout& layout, int part, Scalar u, Scalar v) {
    const int s = layout.chart_size;
    auto clampv = [](Scalar x, Scalar lo, Scalar hi) { return x < lo ? lo : (x > hi ? hi : x); };
    Scalar x = clampv(u, Scalar(0), Scalar(1)) * s - Scalar(0.5);
    Scalar y = clampv(v, Scalar(0), Scalar(1)) * s - Scalar(0.5);
    x = clampv(x, Scalar(0), Scalar(s - 1));
    y = clampv(y, Scalar(0), Scalar(s - 1));
    int x0 = int(x), y0 = int(y);
    Scalar fx = x - x0, fy = y - y0;
    int x1 = x0 + 1 < s ? x0 + 1 : s - 1;
    int y1 = y0 + 1 < s ? y0 + 1 : s - 1;
    auto [ox, oy] = layout.chart_origin(part);
    return {ox + x0, oy + y0, ox + x1, oy + y1,
            (Scalar(1) - fx) * (Scalar(1) - fy), (Scalar(1) - fx) * fy,
            fx * (Scalar(1) - fy), fx * fy};
}
}  // namespace detail

// Differentiable bilinear texture sampling at the pose image's (part, u, v);
// background pixels produce zero vectors.
template <class Scalar>
FeatureImageT<Scalar> feature_render(const TextureStackT<Scalar>& tex, const IUVImage& pose_img) {
    if (tex.layout.part_count != pose_img.part_count)
        throw std::invalid_argument("feature_render: texture/pose part count mismatch");
    detail::feature_render_calls.fetch_add(1, std::memory_order_relaxed);
    FeatureImageT<Scalar> out(pose_img.width, pose_img.height, tex.channels);
    const int aw = tex.layout.atlas_width();
    for (int y = 0; y < pose_img.height; ++y)
        for (int x = 0; x < pose_img.width; ++x) {
            size_t i = pose_img.idx(x, y);
            int part = pose_img.part[i];
            if (part == 0) continue;
            auto tap = detail::bilinear_tap<Scalar>(tex.layout, part, Scalar(pose_img.u[i]),
                                                    Scalar(pose_img.v[i]));
            const Scalar* d = tex.data.data();
            Scalar* o = &out.data[(size_t(y) * out.width + x) * out.channels];
            for (int c = 0; c < tex.channels; ++c) {
                o[c] = tap.w00 * d[(size_t(tap.y0) * aw + tap.x0) * tex.channels + c] +
                       tap.w01 * d[(size_t(tap.y1) * aw + tap.x0) * tex.channels + c] +
                       tap.w10 * d[(size_t(tap.y0) * aw + tap.x1) * tex.channels + c] +
                       tap.w11 * d[(size_t(tap.y1) * aw + tap.x1) * tex.channels + c];
            }
        }
    return out;
}

// Exact vector-Jacobian product of feature_render with respect to the texel
// values: each sampled texel accumulates its bilinear weight times the
// upstream value.
template <class Scalar>
TextureStackT<Scalar> feature_render_grad(const TextureStackT<Scalar>& tex, const IUVImage& pose_img,
                                          const FeatureImageT<Scalar>& upstream) {
    if (tex.layout.part_count != pose_img.part_count)
        throw std::invalid_argument("feature_render_grad: texture/pose part count mismatch");
    if (upstream.width != pose_img.width || upstream.height != pose_img.height ||
        upstream.channels != tex.channels)
        throw std::invalid_argument("feature_render_grad: upstream shape mismatch");
    TextureStackT<Scalar> grad(tex.layout, tex.channels);
    const int aw = tex.layout.atlas_width();
    for (int y = 0; y < pose_img.height; ++y)
        for (int x = 0; x < pose_img.width; ++x) {
            size_t i = pose_img.idx(x, y);
            int part = pose_img.part[i];
            if (part == 0) continue;
            auto tap = detail::bilinear_tap<Scalar>(tex.layout, part, Scalar(pose_img.u[i]),
                                                    Scalar(pose_img.v[i]));
            const Scalar* up = &upstream.data[(size_t(y) * upstream.width + x) * upstream.channels];
            for (int c = 0; c < tex.channels; ++c) {
                grad.data[(size_t(tap.y0) * aw + tap.x0) * grad.channels + c] += tap.w00 * up[c];
                grad.data[(size_t(tap.y1) * aw + tap.x0) * grad.channels + c] += tap.w01 * up[c];
                grad.data[(size_t(tap.y0) * aw + tap.x1) * grad.channels + c] += tap.w10 * up[c];
                grad.data[(size_t(tap.y1) * aw + tap.x1) * grad.channels + c] += tap.w11 * up[c];
            }
        }
    return grad;
}

uint64_t feature_render_call_count();
void reset_feature_render_call_count();

// 16-bit IUV file format: ch0 = part index, ch1 = round(u*65535), ch2 = round(v*65535).
ImageU16 iuv_quantize(const IUVImage& iuv);
void save_iuv_png(const std::filesystem::path& path, const IUVImage& iuv);
IUVImage load_iuv_png(const std::filesystem::path& path, int part_count);

}  // namespace ego
