#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "egorender/geometry.hpp"

namespace ego {

struct Skeleton {
    struct Joint {
        std::string name;
        int parent;  // -1 for the root
        Eigen::Vector3d rest_offset;
    };
    std::vector<Joint> joints;

    int size() const { return int(joints.size()); }
    int index_of(const std::string& name) const;
};

struct BodyPose {
    RigidTransform root;
    std::vector<Eigen::Matrix3d> rotations;  // local, one per joint

    static BodyPose rest(int joint_count);
    bool is_valid(double tol = 1e-9) const;
};

struct BodyMesh {
    std::vector<Eigen::Vector3f> vertices;  // rest pose
    std::vector<std::array<int, 3>> faces;
    std::vector<std::array<int, 4>> skin_joints;
    std::vector<std::array<float, 4>> skin_weights;  // dyadic (k/256), sum to 1 exactly
    std::vector<int> vertex_part;                    // 1..P
    std::vector<Eigen::Vector2f> vertex_uv;
    int part_count = 0;

    int vertex_count() const { return int(vertices.size()); }
    double max_rest_edge() const;
};

// The 15 joints Mo2Cap2-style estimators report, in the fixed canonical order.
struct JointTargets15 {
    static const std::array<std::string, 15>& names();

    std::array<Eigen::Vector3d, 15> positions{};
    std::array<double, 15> confidence{};

    JointTargets15() { confidence.fill(1.0); }
};

struct BodyConfig {
    // proportions (meters)
    double torso_len = 0.50;  // pelvis -> neck, spine at the midpoint
    double neck_to_head = 0.15;
    double shoulder_x = 0.18, shoulder_y = -0.02;
    double upper_arm = 0.28, forearm = 0.26, hand_stub = 0.06;
    double hip_x = 0.09, hip_y = -0.05;
    double thigh = 0.42, shin = 0.40;
    double toe_drop = 0.06, toe_forward = 0.14;
    // capsule radii
    double r_torso = 0.13, r_head = 0.09;
    double r_upper_arm = 0.045, r_forearm = 0.04;
    double r_thigh = 0.07, r_shin = 0.055;
    // meshing
    double target_edge_m = 0.033;
    double density = 1.0;
    int part_count = 10;  // 10 (coarse) or 24 (DensePose-style subdivision)
};

struct Body {
    Skeleton skeleton;
    BodyMesh mesh;
};

// Procedural capsule-per-part body. Throws std::invalid_argument on
// degenerate proportions.
Body build_canonical_body(const BodyConfig& config = {});

std::vector<std::string> part_names(int part_count);

// World transform per joint (hierarchical composition).
std::vector<RigidTransform> fk_transforms(const Skeleton& skel, const BodyPose& pose);
std::vector<Eigen::Vector3d> forward_kinematics(const Skeleton& skel, const BodyPose& pose);

// Indices into the skeleton for the 15 canonical targets.
std::array<int, 15> target_joint_indices(const Skeleton& skel);
JointTargets15 targets_from_fk(const Skeleton& skel, const BodyPose& pose);

// Linear blend skinning; returns posed vertices in world space.
std::vector<Eigen::Vector3d> skin_mesh(const Skeleton& skel, const BodyMesh& mesh, const BodyPose& pose);

struct IkOptions {
    int max_iters = 200;
    double damping = 1e-2;
    double tolerance_m = 1e-9;
};

struct IkResult {
    BodyPose pose;
    double mean_residual_m = 0.0;  // unweighted mean distance over confident targets
    int iterations = 0;
};

// Damped-least-squares IK on confidence-weighted joint position residuals.
// Returns the best-residual pose encountered. Throws std::invalid_argument
// on non-finite targets.
IkResult solve_ik(const Skeleton& skel, const JointTargets15& targets, const BodyPose& init,
                  const IkOptions& opts = {});

// JSON header + little-endian float32 blocks.
void save_body(const std::filesystem::path& path, const Body& body);
Body load_body(const std::filesystem::path& path);

}  // namespace ego
