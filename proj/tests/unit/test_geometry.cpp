#include <doctest.h>

#include <cmath>
#include <numbers>

#include "egorender/geometry.hpp"
#include "egorender/rng.hpp"

using namespace ego;

TEST_SUITE_BEGIN("geometry");

namespace {
FisheyeCamera test_fisheye() {
    FisheyeCamera cam;
    cam.focal = 100.0;
    cam.principal_point = {160.0, 160.0};
    cam.width = cam.height = 320;
    return cam;
}
}  // namespace

TEST_CASE("fisheye_project on-axis point maps to principal point") {
    auto px = fisheye_project({0, 0, 1}, test_fisheye());
    REQUIRE(px.has_value());
    CHECK(px->x() == doctest::Approx(160.0).epsilon(1e-12));
    CHECK(px->y() == doctest::Approx(160.0).epsilon(1e-12));
}

TEST_CASE("fisheye_project at the 90-degree boundary") {
    auto px = fisheye_project({1, 0, 0}, test_fisheye());
    REQUIRE(px.has_value());
    CHECK(std::abs(px->x() - (160.0 + 100.0 * std::numbers::pi / 2.0)) < 1e-9);
    CHECK(std::abs(px->y() - 160.0) < 1e-9);
}

TEST_CASE("fisheye_project rejects directions beyond the FOV") {
    CHECK_FALSE(fisheye_project({0, 0, -1}, test_fisheye()).has_value());
}

TEST_CASE("fisheye_project throws on a zero-length point") {
    CHECK_THROWS_AS(fisheye_project({0, 0, 0}, test_fisheye()), std::invalid_argument);
}

TEST_CASE("fisheye_unproject principal point gives the optical axis") {
    Eigen::Vector3d d = fisheye_unproject({160, 160}, test_fisheye());
    CHECK((d - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("fisheye_unproject at the FOV radius lies in the z=0 plane") {
    auto cam = test_fisheye();
    Eigen::Vector3d d = fisheye_unproject({160.0 + cam.focal * cam.fov_max, 160.0}, cam);
    CHECK(std::abs(d.z()) < 1e-12);
    CHECK(std::abs(d.norm() - 1.0) < 1e-12);
}

TEST_CASE("fisheye_unproject rejects pixels outside the FOV radius") {
    auto cam = test_fisheye();
    CHECK_THROWS_AS(fisheye_unproject({160.0 + cam.focal * cam.fov_max + 1.0, 160.0}, cam),
                    std::out_of_range);
}

TEST_CASE("fisheye round-trip over 10000 random in-FOV pixels") {
    auto cam = test_fisheye();
    Rng rng(42);
    double max_err = 0;
    for (int i = 0; i < 10000; ++i) {
        double r = cam.focal * cam.fov_max * std::sqrt(rng.uniform01());
        double phi = rng.uniform(0, 2 * std::numbers::pi);
        Eigen::Vector2d px(cam.principal_point.x() + r * std::cos(phi),
                           cam.principal_point.y() + r * std::sin(phi));
        auto back = fisheye_project(fisheye_unproject(px, cam), cam);
        REQUIRE(back.has_value());
        max_err = std::max(max_err, (*back - px).norm());
    }
    CHECK(max_err < 1e-9);
}

TEST_CASE("equidistant direction round-trip and radial monotonicity") {
    auto cam = test_fisheye();
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double theta = rng.uniform(0, cam.fov_max);
        double phi = rng.uniform(0, 2 * std::numbers::pi);
        Eigen::Vector3d d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
        auto px = fisheye_project(d, cam);
        REQUIRE(px.has_value());
        CHECK((*px - cam.principal_point).norm() <= cam.focal * cam.fov_max + 1e-9);
        Eigen::Vector3d back = fisheye_unproject(*px, cam);
        CHECK(back.dot(d) > 1.0 - 1e-12);
    }
    // monotone radius in theta
    double prev_r = -1;
    for (int k = 0; k <= 50; ++k) {
        double theta = cam.fov_max * k / 50.0;
        auto px = fisheye_project(
            {std::sin(theta), 0, std::cos(theta)}, cam);
        double r = (*px - cam.principal_point).norm();
        CHECK(r > prev_r - 1e-15);
        prev_r = r;
    }
}

TEST_CASE("pinhole_project basics") {
    PinholeCamera cam;
    cam.fx = cam.fy = 200;
    cam.principal_point = {128, 128};

    auto on_axis = pinhole_project({0, 0, 2}, cam);
    REQUIRE(on_axis.has_value());
    CHECK(on_axis->first.x() == doctest::Approx(128.0));
    CHECK(on_axis->first.y() == doctest::Approx(128.0));
    CHECK(on_axis->second == doctest::Approx(2.0));

    auto off_axis = pinhole_project({1, 0, 2}, cam);
    REQUIRE(off_axis.has_value());
    CHECK(off_axis->first.x() == doctest::Approx(228.0));
    CHECK(off_axis->second == doctest::Approx(2.0));

    CHECK_FALSE(pinhole_project({0, 0, -1}, cam).has_value());
    CHECK_FALSE(pinhole_project({0, 0, 0}, cam).has_value());
}

TEST_CASE("rigid transform compose/inverse round-trip") {
    Rng rng(3);
    RigidTransform t;
    t.rotation = axis_angle(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized(),
                            rng.uniform(-3, 3));
    t.translation = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    REQUIRE(t.is_valid());

    RigidTransform round = t.compose(t.inverse());
    double max_err = 0;
    for (int i = 0; i < 1000; ++i) {
        Eigen::Vector3d p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        max_err = std::max(max_err, (round.apply(p) - p).norm());
    }
    CHECK(max_err < 1e-9);
}

TEST_CASE("rigid transform composition is associative") {
    Rng rng(11);
    auto random_t = [&]() {
        RigidTransform t;
        t.rotation = axis_angle(
            Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized(),
            rng.uniform(-3, 3));
        t.translation = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        return t;
    };
    RigidTransform a = random_t(), b = random_t(), c = random_t();
    RigidTransform ab_c = a.compose(b).compose(c);
    RigidTransform a_bc = a.compose(b.compose(c));
    Eigen::Vector3d p(0.3, -1.2, 2.0);
    CHECK((ab_c.apply(p) - a_bc.apply(p)).norm() < 1e-12);
}

TEST_CASE("camera json round-trip") {
    FisheyeCamera fe = test_fisheye();
    fe.pose.rotation = axis_angle({0, 1, 0}, 0.4);
    fe.pose.translation = {0.1, -0.2, 0.3};
    fe.fov_max = 1.2;
    FisheyeCamera fe2 = fisheye_from_json(camera_to_json(fe));
    CHECK(fe2.focal == fe.focal);
    CHECK(fe2.fov_max == fe.fov_max);
    CHECK((fe2.pose.rotation - fe.pose.rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((fe2.pose.translation - fe.pose.translation).norm() < 1e-15);

    PinholeCamera ph;
    ph.fx = 210;
    ph.fy = 190;
    ph.pose.translation = {1, 2, 3};
    PinholeCamera ph2 = pinhole_from_json(camera_to_json(ph));
    CHECK(ph2.fx == ph.fx);
    CHECK(ph2.fy == ph.fy);
    CHECK((ph2.pose.translation - ph.pose.translation).norm() == 0.0);

    CHECK_THROWS(fisheye_from_json(camera_to_json(ph)));
}

TEST_SUITE_END();
