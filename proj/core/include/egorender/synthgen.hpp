#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "egorender/body.hpp"
#include "egorender/dataset.hpp"
#include "egorender/rng.hpp"
#include "egorender/texture.hpp"

namespace ego {

// Per-joint Euler angle envelope: rotation = Rx(ax) Ry(ay) Rz(az) with each
// angle confined to [center - halfwidth, center + halfwidth].
struct JointRange {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d halfwidth = Eigen::Vector3d::Zero();
};

struct PoseSamplerParams {
    double motion_scale = 1.0;   // scales every halfwidth
    double base_period = 90.0;   // frames per slow oscillation cycle
    double root_height = 0.93;   // pelvis height; feet near the ground plane
    double root_wander = 0.10;   // horizontal root drift amplitude (m)
    std::map<std::string, JointRange> ranges;  // empty entries fall back to defaults

    static std::map<std::string, JointRange> default_ranges();
};

// Smooth, seed-deterministic pose sequence: each joint angle is a bounded
// two-harmonic oscillation whose frequencies/phases are drawn from the seed,
// so pose_at(frame) is O(1) and order-independent.
class PoseSampler {
public:
    PoseSampler(uint64_t seed, const PoseSamplerParams& params, const Skeleton& skel);

    BodyPose pose_at(int64_t frame) const;
    // the raw per-joint Euler angles driving pose_at (for range checks)
    Eigen::Vector3d angles_at(int64_t frame, int joint) const;
    const JointRange& range_of(int joint) const { return ranges_[joint]; }

private:
    struct Harmonic {
        double f1, p1, f2, p2;
    };
    const Skeleton* skel_;
    PoseSamplerParams params_;
    std::vector<JointRange> ranges_;
    std::vector<std::array<Harmonic, 3>> harmonics_;
    Harmonic wander_x_, wander_z_;
};

// One independent random pose drawn uniformly from the configured ranges.
BodyPose sample_pose(Rng& rng, const PoseSamplerParams& params, const Skeleton& skel);

// Procedural per-part body texture, deterministic per (seed, texture_id).
// If texture_dir is set, PNG atlases found there are used instead (id mod count).
TextureStack sample_texture(uint64_t seed, int texture_id, const AtlasLayout& layout,
                            const std::filesystem::path& texture_dir = {});

// Procedural background, deterministic per (seed, background_id); same
// import-hook contract via background_dir.
ImageF sample_background(uint64_t seed, int background_id, int width, int height,
                         const std::filesystem::path& background_dir = {});

struct GenConfig {
    int n_frames = 2000;
    int n_textures = 20;
    int n_backgrounds = 10;
    int n_external_views = 4;
    int ego_size = 128;
    int view_size = 128;
    uint64_t seed = 0;
    double split = 0.8;  // train fraction
    int workers = 1;

    // ego camera mount, relative to the head joint frame
    double mount_forward_m = 0.08;
    double mount_up_m = 0.03;
    double mount_pitch_deg = 70.0;
    double ego_near_m = 0.18;

    // external camera ring
    double ring_radius_m = 2.2;
    double ring_height_m = 1.4;
    double ring_look_at_y = 0.9;
    double view_focal_scale = 1.0;  // focal = view_size * scale

    PoseSamplerParams pose;
    BodyConfig body;
    AtlasLayout atlas;

    // import hooks (optional; procedural assets are used when empty)
    std::filesystem::path texture_dir;
    std::filesystem::path background_dir;
    std::filesystem::path motion_file;  // JSON: array of per-frame joint angle triples

    std::string to_json() const;
    static GenConfig from_json(const std::string& text);
};

FisheyeCamera ego_camera_for_pose(const GenConfig& cfg, const Skeleton& skel, const BodyPose& pose);
PinholeCamera ring_camera(const GenConfig& cfg, int view_index);

// Writes frames/{id}/... plus meta.json; fully deterministic for a given
// cfg.seed and independent of cfg.workers. Returns the manifest path.
std::filesystem::path generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ego
