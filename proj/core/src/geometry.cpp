#include "egorender/geometry.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

using nlohmann::json;

namespace ego {

bool RigidTransform::is_valid(double tol) const {
    Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

std::optional<Eigen::Vector2d> fisheye_project(const Eigen::Vector3d& point, const FisheyeCamera& cam) {
    double n = point.norm();
    if (n == 0.0) throw std::invalid_argument("fisheye_project: zero-length point");
    double planar = std::hypot(point.x(), point.y());
    double theta = std::atan2(planar, point.z());
    if (theta > cam.fov_max) return std::nullopt;
    if (planar == 0.0) return cam.principal_point;
    double r = cam.focal * theta;
    return Eigen::Vector2d(cam.principal_point.x() + r * point.x() / planar,
                           cam.principal_point.y() + r * point.y() / planar);
}

Eigen::Vector3d fisheye_unproject(const Eigen::Vector2d& pixel, const FisheyeCamera& cam) {
    Eigen::Vector2d d = pixel - cam.principal_point;
    double r = d.norm();
    double max_r = cam.focal * cam.fov_max;
    if (r > max_r * (1.0 + 1e-12))
        throw std::out_of_range("fisheye_unproject: pixel outside field of view");
    if (r == 0.0) return Eigen::Vector3d(0, 0, 1);
    double theta = r / cam.focal;
    double s = std::sin(theta) / r;
    return Eigen::Vector3d(s * d.x(), s * d.y(), std::cos(theta));
}

std::optional<std::pair<Eigen::Vector2d, double>> pinhole_project(const Eigen::Vector3d& point,
                                                                  const PinholeCamera& cam) {
    constexpr double kMinDepth = 1e-6;
    if (point.z() <= kMinDepth) return std::nullopt;
    Eigen::Vector2d px(cam.principal_point.x() + cam.fx * point.x() / point.z(),
                       cam.principal_point.y() + cam.fy * point.y() / point.z());
    return std::make_pair(px, point.z());
}

namespace {

json transform_fields(const RigidTransform& t) {
    json j;
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot[r * 3 + c] = t.rotation(r, c);
    j["rotation"] = rot;
    j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
    return j;
}

RigidTransform transform_from(const json& j) {
    RigidTransform t;
    auto rot = j.at("rotation").get<std::vector<double>>();
    if (rot.size() != 9) throw std::runtime_error("camera json: rotation must have 9 entries");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot[r * 3 + c];
    auto tr = j.at("translation").get<std::vector<double>>();
    if (tr.size() != 3) throw std::runtime_error("camera json: translation must have 3 entries");
    t.translation = {tr[0], tr[1], tr[2]};
    if (!t.is_valid(1e-6)) throw std::runtime_error("camera json: rotation not orthonormal");
    return t;
}

}  // namespace

std::string camera_to_json(const FisheyeCamera& cam) {
    json j = transform_fields(cam.pose);
    j["type"] = "fisheye";
    j["focal"] = cam.focal;
    j["principal_point"] = {cam.principal_point.x(), cam.principal_point.y()};
    j["image_size"] = {cam.width, cam.height};
    j["fov_max"] = cam.fov_max;
    return j.dump(2);
}

std::string camera_to_json(const PinholeCamera& cam) {
    json j = transform_fields(cam.pose);
    j["type"] = "pinhole";
    j["focal"] = {cam.fx, cam.fy};
    j["principal_point"] = {cam.principal_point.x(), cam.principal_point.y()};
    j["image_size"] = {cam.width, cam.height};
    return j.dump(2);
}

FisheyeCamera fisheye_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("type") != "fisheye") throw std::runtime_error("camera json: expected type fisheye");
    FisheyeCamera cam;
    cam.focal = j.at("focal").get<double>();
    auto pp = j.at("principal_point").get<std::vector<double>>();
    cam.principal_point = {pp.at(0), pp.at(1)};
    auto sz = j.at("image_size").get<std::vector<int>>();
    cam.width = sz.at(0);
    cam.height = sz.at(1);
    cam.pose = transform_from(j);
    if (j.contains("fov_max")) cam.fov_max = j["fov_max"].get<double>();
    if (!cam.is_valid()) throw std::runtime_error("camera json: invalid fisheye intrinsics");
    return cam;
}

PinholeCamera pinhole_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("type") != "pinhole") throw std::runtime_error("camera json: expected type pinhole");
    PinholeCamera cam;
    auto f = j.at("focal").get<std::vector<double>>();
    cam.fx = f.at(0);
    cam.fy = f.at(1);
    auto pp = j.at("principal_point").get<std::vector<double>>();
    cam.principal_point = {pp.at(0), pp.at(1)};
    auto sz = j.at("image_size").get<std::vector<int>>();
    cam.width = sz.at(0);
    cam.height = sz.at(1);
    cam.pose = transform_from(j);
    if (!cam.is_valid()) throw std::runtime_error("camera json: invalid pinhole intrinsics");
    return cam;
}

}  // namespace ego
