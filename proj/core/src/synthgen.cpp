#include "egorender/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>
#include <thread>

#include "egorender/common.hpp"
#include "egorender/raster.hpp"

using nlohmann::json;

namespace ego {

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// pose sampling

std::map<std::string, JointRange> PoseSamplerParams::default_ranges() {
    auto r = [](double cx, double cy, double cz, double hx, double hy, double hz) {
        return JointRange{{cx, cy, cz}, {hx, hy, hz}};
    };
    std::map<std::string, JointRange> m;
    m["pelvis"] = r(0, 0, 0, 0.06, 3.1, 0.06);  // slow full-turn yaw
    m["spine"] = r(0.05, 0, 0, 0.12, 0.15, 0.08);
    m["neck"] = r(0.05, 0, 0, 0.12, 0.25, 0.08);
    m["head"] = r(0, 0, 0, 0.15, 0.3, 0.1);
    // T-pose arms: z-rotation lowers the arm, y swings it fore/aft
    m["l_shoulder"] = r(0, 0.1, -0.7, 0.15, 0.5, 0.45);
    m["r_shoulder"] = r(0, -0.1, 0.7, 0.15, 0.5, 0.45);
    m["l_elbow"] = r(0, -0.5, -0.3, 0.1, 0.5, 0.3);
    m["r_elbow"] = r(0, 0.5, 0.3, 0.1, 0.5, 0.3);
    m["l_wrist"] = r(0, 0, 0, 0.15, 0.2, 0.2);
    m["r_wrist"] = r(0, 0, 0, 0.15, 0.2, 0.2);
    m["l_hip"] = r(-0.15, 0, 0, 0.45, 0.12, 0.08);
    m["r_hip"] = r(-0.15, 0, 0, 0.45, 0.12, 0.08);
    m["l_knee"] = r(0.45, 0, 0, 0.45, 0.02, 0.02);
    m["r_knee"] = r(0.45, 0, 0, 0.45, 0.02, 0.02);
    m["l_ankle"] = r(-0.1, 0, 0, 0.2, 0.05, 0.05);
    m["r_ankle"] = r(-0.1, 0, 0, 0.2, 0.05, 0.05);
    m["l_toe"] = r(0, 0, 0, 0.1, 0, 0);
    m["r_toe"] = r(0, 0, 0, 0.1, 0, 0);
    return m;
}

PoseSampler::PoseSampler(uint64_t seed, const PoseSamplerParams& params, const Skeleton& skel)
    : skel_(&skel), params_(params) {
    auto defaults = PoseSamplerParams::default_ranges();
    ranges_.resize(skel.size());
    harmonics_.resize(skel.size());
    for (int j = 0; j < skel.size(); ++j) {
        const std::string& name = skel.joints[j].name;
        auto it = params.ranges.find(name);
        JointRange jr = it != params.ranges.end()
                            ? it->second
                            : (defaults.count(name) ? defaults[name] : JointRange{});
        jr.halfwidth *= params.motion_scale;
        ranges_[j] = jr;
        for (int a = 0; a < 3; ++a) {
            Rng rng(seed, hash_combine(uint64_t(j) * 8 + a, 0x706f7365ull));
            harmonics_[j][a] = {rng.uniform(0.4, 1.4), rng.uniform01(), rng.uniform(1.6, 3.4),
                                rng.uniform01()};
        }
    }
    Rng rng(seed, 0x77616e64ull);
    wander_x_ = {rng.uniform(0.3, 0.8), rng.uniform01(), rng.uniform(1.2, 2.0), rng.uniform01()};
    wander_z_ = {rng.uniform(0.3, 0.8), rng.uniform01(), rng.uniform(1.2, 2.0), rng.uniform01()};
}

namespace {
double oscillate(const double t, double f1, double p1, double f2, double p2) {
    return 0.62 * std::sin(kTau * (f1 * t + p1)) + 0.38 * std::sin(kTau * (f2 * t + p2));
}
}  // namespace

Eigen::Vector3d PoseSampler::angles_at(int64_t frame, int joint) const {
    const double t = double(frame) / params_.base_period;
    Eigen::Vector3d out;
    for (int a = 0; a < 3; ++a) {
        const Harmonic& h = harmonics_[joint][a];
        out[a] = ranges_[joint].center[a] +
                 ranges_[joint].halfwidth[a] * oscillate(t, h.f1, h.p1, h.f2, h.p2);
    }
    return out;
}

namespace {
Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& a) {
    return (Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()) *
            Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()))
        .toRotationMatrix();
}
}  // namespace

BodyPose PoseSampler::pose_at(int64_t frame) const {
    BodyPose pose = BodyPose::rest(skel_->size());
    for (int j = 0; j < skel_->size(); ++j) pose.rotations[j] = rotation_from_euler(angles_at(frame, j));
    const double t = double(frame) / params_.base_period;
    pose.root.translation = {
        params_.root_wander * oscillate(t, wander_x_.f1, wander_x_.p1, wander_x_.f2, wander_x_.p2),
        params_.root_height,
        params_.root_wander * oscillate(t, wander_z_.f1, wander_z_.p1, wander_z_.f2, wander_z_.p2)};
    return pose;
}

BodyPose sample_pose(Rng& rng, const PoseSamplerParams& params, const Skeleton& skel) {
    auto defaults = PoseSamplerParams::default_ranges();
    BodyPose pose = BodyPose::rest(skel.size());
    for (int j = 0; j < skel.size(); ++j) {
        const std::string& name = skel.joints[j].name;
        auto it = params.ranges.find(name);
        JointRange jr = it != params.ranges.end()
                            ? it->second
                            : (defaults.count(name) ? defaults[name] : JointRange{});
        Eigen::Vector3d a;
        for (int k = 0; k < 3; ++k)
            a[k] = jr.center[k] + params.motion_scale * jr.halfwidth[k] * rng.uniform(-1, 1);
        pose.rotations[j] = rotation_from_euler(a);
    }
    pose.root.translation = {0, params.root_height, 0};
    return pose;
}

// ---------------------------------------------------------------------------
// texture / background sampling

namespace {

ImageF resample_nearest(const ImageF& src, int w, int h) {
    ImageF out(w, h, src.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int sx = std::min(src.width - 1, x * src.width / w);
            int sy = std::min(src.height - 1, y * src.height / h);
            for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
        }
    return out;
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

TextureStack sample_texture(uint64_t seed, int texture_id, const AtlasLayout& layout,
                            const std::filesystem::path& texture_dir) {
    if (!texture_dir.empty()) {
        auto files = list_pngs(texture_dir);
        if (files.empty()) throw MissingArtifactError("texture_dir has no .png files");
        ImageF img = dequantize(load_png8(files[size_t(texture_id) % files.size()]));
        ImageF fitted = resample_nearest(img, layout.atlas_width(), layout.atlas_height());
        TextureStack stack(layout, 3);
        for (size_t i = 0; i < stack.data.size(); ++i) stack.data[i] = fitted.data[i];
        return stack;
    }

    TextureStack stack(layout, 3);
    const int s = layout.chart_size;
    for (int part = 1; part <= layout.part_count; ++part) {
        Rng rng(hash_combine(seed, 0x74657831ull), hash_combine(uint64_t(texture_id), part));
        float base[3], alt[3];
        for (int c = 0; c < 3; ++c) base[c] = float(rng.uniform(0.15, 0.85));
        for (int c = 0; c < 3; ++c) alt[c] = float(rng.uniform(0.15, 0.85));
        int pattern = int(rng.below(3));
        double freq = rng.uniform(2.0, 6.0);
        uint64_t noise_key = rng.next_u64();
        auto [ox, oy] = layout.chart_origin(part);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                double u = (x + 0.5) / s, v = (y + 0.5) / s;
                double mixv;
                switch (pattern) {
                    case 0: mixv = 0.5 + 0.5 * std::sin(kTau * freq * u); break;
                    case 1: mixv = 0.5 + 0.5 * std::sin(kTau * freq * v); break;
                    default:
                        mixv = (std::sin(kTau * freq * u) * std::sin(kTau * freq * v)) > 0 ? 1.0 : 0.0;
                }
                double noise =
                    (double(splitmix64(noise_key ^ (uint64_t(y) * 131071 + x)) >> 11) * 0x1.0p-53 -
                     0.5) * 0.06;
                for (int c = 0; c < 3; ++c) {
                    double val = base[c] * (1.0 - mixv) + alt[c] * mixv + noise;
                    stack.at(ox + x, oy + y, c) = float(std::clamp(val, 0.0, 1.0));
                }
            }
    }
    return stack;
}

ImageF sample_background(uint64_t seed, int background_id, int width, int height,
                         const std::filesystem::path& background_dir) {
    if (!background_dir.empty()) {
        auto files = list_pngs(background_dir);
        if (files.empty()) throw MissingArtifactError("background_dir has no .png files");
        ImageF img = dequantize(load_png8(files[size_t(background_id) % files.size()]));
        return resample_nearest(img, width, height);
    }

    Rng rng(hash_combine(seed, 0x62616b67ull), uint64_t(background_id));
    float top[3], bottom[3];
    for (int c = 0; c < 3; ++c) top[c] = float(rng.uniform(0.1, 0.9));
    for (int c = 0; c < 3; ++c) bottom[c] = float(rng.uniform(0.1, 0.9));
    struct Blob {
        double cx, cy, r, amp;
    } blobs[3];
    for (auto& b : blobs)
        b = {rng.uniform01(), rng.uniform01(), rng.uniform(0.1, 0.35), rng.uniform(-0.15, 0.15)};

    ImageF img(width, height, 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double fy = (y + 0.5) / height, fx = (x + 0.5) / width;
            double blob = 0;
            for (const auto& b : blobs) {
                double d2 = (fx - b.cx) * (fx - b.cx) + (fy - b.cy) * (fy - b.cy);
                blob += b.amp * std::exp(-d2 / (2 * b.r * b.r));
            }
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) =
                    float(std::clamp(top[c] * (1 - fy) + bottom[c] * fy + blob, 0.0, 1.0));
        }
    return img;
}

// ---------------------------------------------------------------------------
// cameras

FisheyeCamera ego_camera_for_pose(const GenConfig& cfg, const Skeleton& skel, const BodyPose& pose) {
    auto world = fk_transforms(skel, pose);
    const RigidTransform& head = world[skel.index_of("head")];

    const double pitch = cfg.mount_pitch_deg * std::numbers::pi / 180.0;
    // camera axes in the head frame: optical axis tilted `pitch` below forward
    Eigen::Matrix3d cam_to_head;
    cam_to_head.col(0) = Eigen::Vector3d(1, 0, 0);
    cam_to_head.col(1) = Eigen::Vector3d(0, std::cos(pitch), std::sin(pitch));
    cam_to_head.col(2) = Eigen::Vector3d(0, -std::sin(pitch), std::cos(pitch));

    Eigen::Vector3d cam_pos =
        head.translation + head.rotation * Eigen::Vector3d(0, cfg.mount_up_m, cfg.mount_forward_m);
    Eigen::Matrix3d cam_to_world = head.rotation * cam_to_head;

    FisheyeCamera cam;
    cam.width = cam.height = cfg.ego_size;
    cam.principal_point = {cfg.ego_size / 2.0, cfg.ego_size / 2.0};
    cam.focal = cfg.ego_size / std::numbers::pi;  // fov circle inscribed in the frame
    cam.pose.rotation = cam_to_world.transpose();
    cam.pose.translation = -(cam.pose.rotation * cam_pos);
    return cam;
}

PinholeCamera ring_camera(const GenConfig& cfg, int view_index) {
    const double az = kTau * view_index / std::max(1, cfg.n_external_views);
    Eigen::Vector3d pos(cfg.ring_radius_m * std::sin(az), cfg.ring_height_m,
                        cfg.ring_radius_m * std::cos(az));
    Eigen::Vector3d target(0, cfg.ring_look_at_y, 0);

    Eigen::Vector3d z = (target - pos).normalized();
    Eigen::Vector3d x = z.cross(Eigen::Vector3d(0, 1, 0)).normalized();
    Eigen::Vector3d y = z.cross(x);

    PinholeCamera cam;
    cam.width = cam.height = cfg.view_size;
    cam.principal_point = {cfg.view_size / 2.0, cfg.view_size / 2.0};
    cam.fx = cam.fy = cfg.view_size * cfg.view_focal_scale;
    cam.pose.rotation.row(0) = x;
    cam.pose.rotation.row(1) = y;
    cam.pose.rotation.row(2) = z;
    cam.pose.translation = -(cam.pose.rotation * pos);
    return cam;
}

// ---------------------------------------------------------------------------
// GenConfig json

std::string GenConfig::to_json() const {
    json j;
    j["n_frames"] = n_frames;
    j["n_textures"] = n_textures;
    j["n_backgrounds"] = n_backgrounds;
    j["n_external_views"] = n_external_views;
    j["ego_size"] = ego_size;
    j["view_size"] = view_size;
    j["seed"] = seed;
    j["split"] = split;
    j["workers"] = workers;
    j["mount_forward_m"] = mount_forward_m;
    j["mount_up_m"] = mount_up_m;
    j["mount_pitch_deg"] = mount_pitch_deg;
    j["ego_near_m"] = ego_near_m;
    j["ring_radius_m"] = ring_radius_m;
    j["ring_height_m"] = ring_height_m;
    j["ring_look_at_y"] = ring_look_at_y;
    j["view_focal_scale"] = view_focal_scale;
    j["pose"] = {{"motion_scale", pose.motion_scale},
                 {"base_period", pose.base_period},
                 {"root_height", pose.root_height},
                 {"root_wander", pose.root_wander}};
    json ranges = json::object();
    for (const auto& [name, jr] : pose.ranges)
        ranges[name] = {{"center", {jr.center.x(), jr.center.y(), jr.center.z()}},
                        {"halfwidth", {jr.halfwidth.x(), jr.halfwidth.y(), jr.halfwidth.z()}}};
    j["pose"]["ranges"] = ranges;
    j["body"] = {{"part_count", body.part_count},
                 {"density", body.density},
                 {"target_edge_m", body.target_edge_m}};
    j["atlas"] = {{"part_count", atlas.part_count},
                  {"chart_size", atlas.chart_size},
                  {"grid_cols", atlas.grid_cols}};
    j["texture_dir"] = texture_dir.string();
    j["background_dir"] = background_dir.string();
    j["motion_file"] = motion_file.string();
    return j.dump(2);
}

GenConfig GenConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    GenConfig c;
    c.n_frames = j.value("n_frames", c.n_frames);
    c.n_textures = j.value("n_textures", c.n_textures);
    c.n_backgrounds = j.value("n_backgrounds", c.n_backgrounds);
    c.n_external_views = j.value("n_external_views", c.n_external_views);
    c.ego_size = j.value("ego_size", c.ego_size);
    c.view_size = j.value("view_size", c.view_size);
    c.seed = j.value("seed", c.seed);
    c.split = j.value("split", c.split);
    c.workers = j.value("workers", c.workers);
    c.mount_forward_m = j.value("mount_forward_m", c.mount_forward_m);
    c.mount_up_m = j.value("mount_up_m", c.mount_up_m);
    c.mount_pitch_deg = j.value("mount_pitch_deg", c.mount_pitch_deg);
    c.ego_near_m = j.value("ego_near_m", c.ego_near_m);
    c.ring_radius_m = j.value("ring_radius_m", c.ring_radius_m);
    c.ring_height_m = j.value("ring_height_m", c.ring_height_m);
    c.ring_look_at_y = j.value("ring_look_at_y", c.ring_look_at_y);
    c.view_focal_scale = j.value("view_focal_scale", c.view_focal_scale);
    if (j.contains("pose")) {
        const auto& p = j["pose"];
        c.pose.motion_scale = p.value("motion_scale", c.pose.motion_scale);
        c.pose.base_period = p.value("base_period", c.pose.base_period);
        c.pose.root_height = p.value("root_height", c.pose.root_height);
        c.pose.root_wander = p.value("root_wander", c.pose.root_wander);
        if (p.contains("ranges"))
            for (const auto& [name, jr] : p["ranges"].items()) {
                JointRange r;
                auto cc = jr.at("center").get<std::vector<double>>();
                auto hh = jr.at("halfwidth").get<std::vector<double>>();
                r.center = {cc[0], cc[1], cc[2]};
                r.halfwidth = {hh[0], hh[1], hh[2]};
                c.pose.ranges[name] = r;
            }
    }
    if (j.contains("body")) {
        c.body.part_count = j["body"].value("part_count", c.body.part_count);
        c.body.density = j["body"].value("density", c.body.density);
        c.body.target_edge_m = j["body"].value("target_edge_m", c.body.target_edge_m);
    }
    if (j.contains("atlas")) {
        c.atlas.part_count = j["atlas"].value("part_count", c.atlas.part_count);
        c.atlas.chart_size = j["atlas"].value("chart_size", c.atlas.chart_size);
        c.atlas.grid_cols = j["atlas"].value("grid_cols", c.atlas.grid_cols);
    }
    c.texture_dir = j.value("texture_dir", std::string());
    c.background_dir = j.value("background_dir", std::string());
    c.motion_file = j.value("motion_file", std::string());
    return c;
}

// ---------------------------------------------------------------------------
// dataset generation

namespace {

ImageF composite(const FeatureImage& fg, const IUVImage& iuv, const ImageF& bg) {
    ImageF out = bg;
    for (int y = 0; y < iuv.height; ++y)
        for (int x = 0; x < iuv.width; ++x)
            if (iuv.foreground(x, y))
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) = std::clamp(fg.at(x, y, c), 0.f, 1.f);
    return out;
}

json pose_to_json(const BodyPose& pose, const JointTargets15& joints) {
    json j;
    json rots = json::array();
    for (const auto& r : pose.rotations) {
        json m = json::array();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m.push_back(r(a, b));
        rots.push_back(m);
    }
    j["rotations"] = rots;
    json root;
    json rm = json::array();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) rm.push_back(pose.root.rotation(a, b));
    root["rotation"] = rm;
    root["translation"] = {pose.root.translation.x(), pose.root.translation.y(),
                           pose.root.translation.z()};
    j["root"] = root;
    json pts = json::array();
    for (const auto& p : joints.positions) pts.push_back({p.x(), p.y(), p.z()});
    j["joints15"] = pts;
    return j;
}

std::vector<std::vector<Eigen::Vector3d>> load_motion_file(const std::filesystem::path& path,
                                                           int joint_count) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open motion file: " + path.string());
    json j = json::parse(in);
    std::vector<std::vector<Eigen::Vector3d>> frames;
    for (const auto& frame : j) {
        if (int(frame.size()) != joint_count)
            throw std::invalid_argument("motion file: expected " + std::to_string(joint_count) +
                                        " joints per frame");
        std::vector<Eigen::Vector3d> angles;
        for (const auto& a : frame) angles.push_back({a[0].get<double>(), a[1].get<double>(),
                                                      a[2].get<double>()});
        frames.push_back(std::move(angles));
    }
    if (frames.empty()) throw std::invalid_argument("motion file: no frames");
    return frames;
}

}  // namespace

std::filesystem::path generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    if (cfg.n_frames <= 0) throw std::invalid_argument("generate_dataset: n_frames must be > 0");
    if (!(cfg.split > 0.0 && cfg.split < 1.0))
        throw std::invalid_argument("generate_dataset: split must be in (0,1)");
    if (cfg.n_external_views < 0 || cfg.n_textures <= 0 || cfg.n_backgrounds <= 0)
        throw std::invalid_argument("generate_dataset: bad counts");

    std::error_code ec;
    fs::create_directories(out_dir / "frames", ec);
    if (ec) throw MissingArtifactError("generate_dataset: cannot create " + out_dir.string());

    const Body body = build_canonical_body(cfg.body);
    AtlasLayout atlas = cfg.atlas;
    atlas.part_count = body.mesh.part_count;
    const PoseSampler sampler(cfg.seed, cfg.pose, body.skeleton);

    std::vector<std::vector<Eigen::Vector3d>> imported_motion;
    if (!cfg.motion_file.empty())
        imported_motion = load_motion_file(cfg.motion_file, body.skeleton.size());

    // textures are shared across frames; build them up front
    std::vector<TextureStack> textures;
    for (int t = 0; t < cfg.n_textures; ++t)
        textures.push_back(sample_texture(cfg.seed, t, atlas, cfg.texture_dir));

    std::vector<PinholeCamera> ring;
    for (int v = 0; v < cfg.n_external_views; ++v) ring.push_back(ring_camera(cfg, v));

    RasterOptions ego_opts;
    ego_opts.max_edge_m = 0.15;
    ego_opts.near_m = cfg.ego_near_m;
    RasterOptions view_opts;

    auto pose_for_frame = [&](int f) {
        if (imported_motion.empty()) return sampler.pose_at(f);
        BodyPose pose = BodyPose::rest(body.skeleton.size());
        const auto& angles = imported_motion[size_t(f) % imported_motion.size()];
        for (int jn = 0; jn < body.skeleton.size(); ++jn)
            pose.rotations[jn] = rotation_from_euler(angles[jn]);
        pose.root.translation = {0, cfg.pose.root_height, 0};
        return pose;
    };

    auto render_frame = [&](int f) {
        char name[16];
        std::snprintf(name, sizeof name, "%06d", f);
        fs::path final_dir = out_dir / "frames" / name;
        fs::path tmp_dir = out_dir / "frames" / (std::string(name) + ".tmp");
        fs::remove_all(tmp_dir);
        fs::create_directories(tmp_dir);

        const BodyPose pose = pose_for_frame(f);
        const int texture_id = int(hash_combine(cfg.seed, hash_combine(0x74657873ull, f)) %
                                   uint64_t(cfg.n_textures));
        const int background_id = int(hash_combine(cfg.seed, hash_combine(0x62677364ull, f)) %
                                      uint64_t(cfg.n_backgrounds));
        const TextureStack& tex = textures[texture_id];

        auto posed = skin_mesh(body.skeleton, body.mesh, pose);
        auto joints = targets_from_fk(body.skeleton, pose);

        // ego view
        FisheyeCamera ego_cam = ego_camera_for_pose(cfg, body.skeleton, pose);
        IUVImage ego_iuv = rasterize(posed, body.mesh, ego_cam, ego_opts);
        ImageF ego_bg =
            sample_background(cfg.seed, background_id, cfg.ego_size, cfg.ego_size, cfg.background_dir);
        ImageF ego_img = composite(feature_render(tex, ego_iuv), ego_iuv, ego_bg);
        save_png(tmp_dir / "ego.png", quantize_u8(ego_img));
        save_iuv_png(tmp_dir / "ego_iuv.png", ego_iuv);
        {
            std::ofstream pose_out(tmp_dir / "pose.json");
            pose_out << pose_to_json(pose, joints).dump(2);
        }
        {
            std::ofstream cam_out(tmp_dir / "ego_camera.json");
            cam_out << camera_to_json(ego_cam);
        }

        for (int v = 0; v < cfg.n_external_views; ++v) {
            fs::path view_dir = tmp_dir / "views" / std::to_string(v);
            fs::create_directories(view_dir);
            IUVImage iuv = rasterize(posed, body.mesh, ring[v], view_opts);
            ImageF bg = sample_background(cfg.seed, background_id, cfg.view_size, cfg.view_size,
                                          cfg.background_dir);
            ImageF img = composite(feature_render(tex, iuv), iuv, bg);
            save_png(view_dir / "img.png", quantize_u8(img));
            save_iuv_png(view_dir / "iuv.png", iuv);
            ImageU8 mask(cfg.view_size, cfg.view_size, 1);
            for (size_t i = 0; i < iuv.pixel_count(); ++i) mask.data[i] = iuv.part[i] ? 255 : 0;
            save_png(view_dir / "mask.png", mask);
            std::ofstream cam_out(view_dir / "camera.json");
            cam_out << camera_to_json(ring[v]);
        }

        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (int f = 0; f < cfg.n_frames; ++f) render_frame(f);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int f = w; f < cfg.n_frames; f += workers) render_frame(f);
            });
        for (auto& t : pool) t.join();
    }

    const int n_train = int(std::llround(cfg.n_frames * cfg.split));
    json meta;
    meta["format_version"] = 1;
    meta["config"] = json::parse(cfg.to_json());
    meta["atlas"] = {{"part_count", atlas.part_count},
                     {"chart_size", atlas.chart_size},
                     {"grid_cols", atlas.grid_cols}};
    meta["part_count"] = body.mesh.part_count;
    meta["joint_count"] = body.skeleton.size();
    meta["ego_size"] = cfg.ego_size;
    meta["view_size"] = cfg.view_size;
    meta["n_views"] = cfg.n_external_views;
    std::vector<int> train_ids, test_ids;
    for (int f = 0; f < cfg.n_frames; ++f) (f < n_train ? train_ids : test_ids).push_back(f);
    meta["train_ids"] = train_ids;
    meta["test_ids"] = test_ids;

    fs::path manifest = out_dir / "meta.json";
    fs::path manifest_tmp = out_dir / "meta.json.tmp";
    {
        std::ofstream out(manifest_tmp);
        out << meta.dump(2);
    }
    fs::rename(manifest_tmp, manifest);
    return manifest;
}

}  // namespace ego
