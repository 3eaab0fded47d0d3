#include "egorender/raster.hpp"

#include <cmath>
#include <stdexcept>

namespace ego {

namespace detail {
std::atomic<uint64_t> feature_render_calls{0};
}

uint64_t feature_render_call_count() { return detail::feature_render_calls.load(); }
void reset_feature_render_call_count() { detail::feature_render_calls.store(0); }

namespace {

constexpr double kSubpixel = 1048576.0;  // snap grid for projected coordinates

double snap(double v) { return std::round(v * kSubpixel) / kSubpixel; }

struct Projected {
    bool valid = false;
    double x = 0, y = 0;
    double depth = 0;    // z for pinhole, range for fisheye
    double inv_z = 1.0;  // perspective-correct weight; 1 for fisheye
};

void check_edge_bound(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh,
                      double max_edge) {
    for (size_t f = 0; f < mesh.faces.size(); ++f)
        for (int e = 0; e < 3; ++e) {
            int a = mesh.faces[f][e], b = mesh.faces[f][(e + 1) % 3];
            double len = (positions[a] - positions[b]).norm();
            if (len > max_edge)
                throw std::invalid_argument(
                    "rasterize: posed edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") of face " + std::to_string(f) + " is " + std::to_string(len) +
                    " m, above the fisheye edge bound " + std::to_string(max_edge) + " m");
        }
}

IUVImage rasterize_core(const std::vector<Projected>& proj, const BodyMesh& mesh, int width,
                        int height, int part_count, bool perspective_correct,
                        double fov_radius_sq, double cx, double cy, double near_clip) {
    IUVImage out = IUVImage::background(width, height, part_count);
    std::vector<int32_t> owner(out.pixel_count(), -1);

    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        const Projected &p0 = proj[face[0]], &p1 = proj[face[1]], &p2 = proj[face[2]];
        if (!p0.valid || !p1.valid || !p2.valid) continue;

        double area = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        if (area >= 0) continue;  // back-facing or degenerate

        int min_x = std::max(0, int(std::ceil(std::min({p0.x, p1.x, p2.x}) - 0.5)));
        int max_x = std::min(width - 1, int(std::floor(std::max({p0.x, p1.x, p2.x}) - 0.5)));
        int min_y = std::max(0, int(std::ceil(std::min({p0.y, p1.y, p2.y}) - 0.5)));
        int max_y = std::min(height - 1, int(std::floor(std::max({p0.y, p1.y, p2.y}) - 0.5)));
        if (min_x > max_x || min_y > max_y) continue;

        const double inv_area = 1.0 / area;
        const Eigen::Vector2f uv0 = mesh.vertex_uv[face[0]], uv1 = mesh.vertex_uv[face[1]],
                              uv2 = mesh.vertex_uv[face[2]];
        const int part = mesh.vertex_part[face[0]];

        for (int py = min_y; py <= max_y; ++py) {
            double sy = py + 0.5;
            for (int px = min_x; px <= max_x; ++px) {
                double sx = px + 0.5;
                double w0 = ((p1.x - sx) * (p2.y - sy) - (p2.x - sx) * (p1.y - sy)) * inv_area;
                double w1 = ((p2.x - sx) * (p0.y - sy) - (p0.x - sx) * (p2.y - sy)) * inv_area;
                double w2 = 1.0 - w0 - w1;
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                if (fov_radius_sq > 0) {
                    double dx = sx - cx, dy = sy - cy;
                    if (dx * dx + dy * dy > fov_radius_sq) continue;
                }

                double depth, u, v;
                if (perspective_correct) {
                    double iz = w0 * p0.inv_z + w1 * p1.inv_z + w2 * p2.inv_z;
                    depth = 1.0 / iz;
                    u = (w0 * p0.inv_z * uv0.x() + w1 * p1.inv_z * uv1.x() +
                         w2 * p2.inv_z * uv2.x()) * depth;
                    v = (w0 * p0.inv_z * uv0.y() + w1 * p1.inv_z * uv1.y() +
                         w2 * p2.inv_z * uv2.y()) * depth;
                } else {
                    depth = w0 * p0.depth + w1 * p1.depth + w2 * p2.depth;
                    u = w0 * uv0.x() + w1 * uv1.x() + w2 * uv2.x();
                    v = w0 * uv0.y() + w1 * uv1.y() + w2 * uv2.y();
                }

                if (depth < near_clip) continue;
                size_t i = out.idx(px, py);
                float d = float(depth);
                bool wins = d < out.depth[i] || (d == out.depth[i] && int32_t(f) < owner[i]);
                if (!wins) continue;
                out.depth[i] = d;
                out.part[i] = uint16_t(part);
                out.u[i] = float(std::clamp(u, 0.0, 1.0));
                out.v[i] = float(std::clamp(v, 0.0, 1.0));
                owner[i] = int32_t(f);
            }
        }
    }
    return out;
}

void validate_mesh_inputs(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh) {
    for (const auto& p : positions)
        if (!p.allFinite()) throw std::invalid_argument("rasterize: non-finite posed vertex");
    for (const auto& f : mesh.faces)
        for (int k : f)
            if (k < 0 || size_t(k) >= positions.size())
                throw std::invalid_argument("rasterize: face index out of range");
}

}  // namespace

IUVImage rasterize(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh,
                   const PinholeCamera& cam, const RasterOptions& opts) {
    validate_mesh_inputs(positions, mesh);
    std::vector<Projected> proj(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) {
        Eigen::Vector3d pc = cam.pose.apply(positions[i]);
        auto px = pinhole_project(pc, cam);
        if (!px) continue;
        proj[i] = {true, snap(px->first.x()), snap(px->first.y()), px->second, 1.0 / px->second};
    }
    return rasterize_core(proj, mesh, cam.width, cam.height, mesh.part_count, true, 0.0, 0.0, 0.0,
                          opts.near_m);
}

IUVImage rasterize(const std::vector<Eigen::Vector3d>& positions, const BodyMesh& mesh,
                   const FisheyeCamera& cam, const RasterOptions& opts) {
    validate_mesh_inputs(positions, mesh);
    check_edge_bound(positions, mesh, opts.max_edge_m);

    // Vertices slightly past the FOV edge still project (the equidistant model
    // extends smoothly) so boundary triangles survive; exact FOV is enforced
    // per pixel against the r = focal*fov_max circle.
    const double clip_margin = 0.2;
    std::vector<Projected> proj(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) {
        Eigen::Vector3d pc = cam.pose.apply(positions[i]);
        double n = pc.norm();
        if (n < 1e-9) continue;
        double planar = std::hypot(pc.x(), pc.y());
        double theta = std::atan2(planar, pc.z());
        if (theta > cam.fov_max + clip_margin) continue;
        double x, y;
        if (planar == 0.0) {
            x = cam.principal_point.x();
            y = cam.principal_point.y();
        } else {
            double r = cam.focal * theta;
            x = cam.principal_point.x() + r * pc.x() / planar;
            y = cam.principal_point.y() + r * pc.y() / planar;
        }
        proj[i] = {true, snap(x), snap(y), n, 1.0};
    }
    double fov_r = cam.focal * cam.fov_max;
    return rasterize_core(proj, mesh, cam.width, cam.height, mesh.part_count, false,
                          fov_r * fov_r * (1.0 + 1e-12), cam.principal_point.x(),
                          cam.principal_point.y(), opts.near_m);
}

ImageU16 iuv_quantize(const IUVImage& iuv) {
    ImageU16 img(iuv.width, iuv.height, 3);
    for (size_t i = 0; i < iuv.pixel_count(); ++i) {
        img.data[3 * i + 0] = iuv.part[i];
        img.data[3 * i + 1] = uint16_t(std::lround(double(iuv.u[i]) * 65535.0));
        img.data[3 * i + 2] = uint16_t(std::lround(double(iuv.v[i]) * 65535.0));
    }
    return img;
}

void save_iuv_png(const std::filesystem::path& path, const IUVImage& iuv) {
    save_png(path, iuv_quantize(iuv));
}

IUVImage load_iuv_png(const std::filesystem::path& path, int part_count) {
    ImageU16 img = load_png16(path);
    if (img.channels != 3) throw std::runtime_error("iuv png: expected 3 channels");
    IUVImage iuv = IUVImage::background(img.width, img.height, part_count);
    for (size_t i = 0; i < iuv.pixel_count(); ++i) {
        uint16_t part = img.data[3 * i];
        if (part == 0) continue;
        if (int(part) > part_count) throw std::runtime_error("iuv png: part index above part count");
        iuv.part[i] = part;
        iuv.u[i] = float(img.data[3 * i + 1]) / 65535.0f;
        iuv.v[i] = float(img.data[3 * i + 2]) / 65535.0f;
        iuv.depth[i] = 1.0f;  // dummy; loaded IUVs never drive z-tests
    }
    return iuv;
}

}  // namespace ego
