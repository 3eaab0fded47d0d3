#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace ego {

// Rigid transform p' = R*p + t. Cameras store world->camera in this form.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    RigidTransform compose(const RigidTransform& other) const {
        // (this ∘ other)(p) = this(other(p))
        return {rotation * other.rotation, rotation * other.translation + translation};
    }

    RigidTransform inverse() const {
        Eigen::Matrix3d rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    static RigidTransform identity() { return {}; }

    // RᵀR = I and det(R) = +1, both within tol.
    bool is_valid(double tol = 1e-9) const;
};

// Rotation about an axis (unit vector), angle in radians.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);
// Nearest orthonormal matrix (polar factor).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

// Equidistant fisheye (r = focal * theta), 180 degree FOV by default.
struct FisheyeCamera {
    double focal = 100.0;  // pixels per radian
    Eigen::Vector2d principal_point = {160.0, 160.0};
    int width = 320, height = 320;
    RigidTransform pose;  // world -> camera
    double fov_max = 1.5707963267948966;  // half-angle, radians

    bool is_valid() const { return focal > 0 && fov_max > 0 && fov_max <= 1.5707963267948966 + 1e-12; }
};

struct PinholeCamera {
    double fx = 200.0, fy = 200.0;
    Eigen::Vector2d principal_point = {128.0, 128.0};
    int width = 256, height = 256;
    RigidTransform pose;  // world -> camera

    bool is_valid() const { return fx > 0 && fy > 0; }
};

// Projects a camera-space point. Returns nullopt when the direction angle
// exceeds cam.fov_max. Throws std::invalid_argument on a zero-length input.
std::optional<Eigen::Vector2d> fisheye_project(const Eigen::Vector3d& point, const FisheyeCamera& cam);

// Inverse of fisheye_project; returns a unit direction in camera space.
// Throws std::out_of_range when the pixel radius exceeds focal * fov_max.
Eigen::Vector3d fisheye_unproject(const Eigen::Vector2d& pixel, const FisheyeCamera& cam);

// Perspective projection of a camera-space point; nullopt when depth <= 1e-6 m.
// Second element of the pair is the camera-space depth.
std::optional<std::pair<Eigen::Vector2d, double>> pinhole_project(const Eigen::Vector3d& point,
                                                                  const PinholeCamera& cam);

// JSON (de)serialization. Schema:
//   {type, focal, principal_point, image_size, rotation (row-major 9), translation, fov_max?}
std::string camera_to_json(const FisheyeCamera& cam);
std::string camera_to_json(const PinholeCamera& cam);
FisheyeCamera fisheye_from_json(const std::string& text);
PinholeCamera pinhole_from_json(const std::string& text);

}  // namespace ego
