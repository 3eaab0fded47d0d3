#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "egorender/synthgen.hpp"
#include "egorender/dataset.hpp"
#include "egorender/raster.hpp"
#include "egorender/rng.hpp"

using namespace ego;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("synthgen");

namespace {

GenConfig tiny_config() {
    GenConfig cfg;
    cfg.n_frames = 12;
    cfg.n_textures = 3;
    cfg.n_backgrounds = 2;
    cfg.n_external_views = 2;
    cfg.ego_size = 64;
    cfg.view_size = 64;
    cfg.seed = 11;
    return cfg;
}

// hash of every file in a tree, in sorted path order
uint64_t tree_hash(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    uint64_t h = 0x811c9dc5;
    for (const auto& f : files) {
        h = hash_combine(h, std::hash<std::string>{}(f.lexically_relative(root).string()));
        std::ifstream in(f, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        h = hash_combine(h, std::hash<std::string>{}(bytes));
    }
    return h;
}

}  // namespace

TEST_CASE("zero range widths give the rest pose every frame") {
    Body body = build_canonical_body();
    PoseSamplerParams params;
    params.root_wander = 0.0;
    for (const auto& j : body.skeleton.joints) params.ranges[j.name] = JointRange{};  // all-zero
    PoseSampler sampler(7, params, body.skeleton);
    for (int f = 0; f < 5; ++f) {
        BodyPose p = sampler.pose_at(f);
        for (const auto& r : p.rotations)
            CHECK((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("same seed gives an identical pose sequence") {
    Body body = build_canonical_body();
    PoseSamplerParams params;
    PoseSampler a(42, params, body.skeleton);
    PoseSampler b(42, params, body.skeleton);
    PoseSampler c(43, params, body.skeleton);
    bool any_diff = false;
    for (int f = 0; f < 20; ++f) {
        BodyPose pa = a.pose_at(f), pb = b.pose_at(f);
        for (int j = 0; j < body.skeleton.size(); ++j)
            CHECK((pa.rotations[j] - pb.rotations[j]).cwiseAbs().maxCoeff() == 0.0);
        any_diff |= (a.pose_at(f).rotations[5] - c.pose_at(f).rotations[5]).cwiseAbs().maxCoeff() > 0;
    }
    CHECK(any_diff);
}

TEST_CASE("1000 sampled elbow angles stay inside the configured range") {
    Body body = build_canonical_body();
    PoseSamplerParams params;
    PoseSampler sampler(3, params, body.skeleton);
    int elbow = body.skeleton.index_of("l_elbow");
    const JointRange& range = sampler.range_of(elbow);
    for (int f = 0; f < 1000; ++f) {
        Eigen::Vector3d a = sampler.angles_at(f, elbow);
        for (int k = 0; k < 3; ++k) {
            CHECK(a[k] >= range.center[k] - range.halfwidth[k] - 1e-12);
            CHECK(a[k] <= range.center[k] + range.halfwidth[k] + 1e-12);
        }
    }
}

TEST_CASE("sample_texture determinism and diversity") {
    AtlasLayout layout;
    TextureStack a = sample_texture(5, 0, layout);
    TextureStack b = sample_texture(5, 0, layout);
    TextureStack c = sample_texture(5, 1, layout);
    CHECK(a.data == b.data);
    double l1 = 0;
    for (size_t i = 0; i < a.data.size(); ++i) l1 += std::abs(a.data[i] - c.data[i]);
    CHECK(l1 > 0.0);
    for (float v : a.data) {
        CHECK(v >= 0.f);
        CHECK(v <= 1.f);
    }
}

TEST_CASE("100 sampled textures span a wide per-part mean color range") {
    AtlasLayout layout;
    double lo = 1.0, hi = 0.0;
    for (int id = 0; id < 100; ++id) {
        TextureStack t = sample_texture(9, id, layout);
        auto [ox, oy] = layout.chart_origin(1);
        double mean = 0;
        int n = 0;
        for (int y = 0; y < layout.chart_size; ++y)
            for (int x = 0; x < layout.chart_size; ++x) {
                mean += t.at(ox + x, oy + y, 0);
                ++n;
            }
        mean /= n;
        lo = std::min(lo, mean);
        hi = std::max(hi, mean);
    }
    CHECK(hi - lo >= 0.3);
}

TEST_CASE("generate_dataset writes a deterministic, split-correct tree") {
    GenConfig cfg = tiny_config();
    fs::path base = fs::temp_directory_path() / "egorender_synth_test";
    fs::remove_all(base);

    SUBCASE("manifest counts and split") {
        generate_dataset(cfg, base / "a");
        Dataset ds = Dataset::open(base / "a");
        CHECK(ds.meta().train_ids.size() == 10);  // round(12 * 0.8)
        CHECK(ds.meta().test_ids.size() == 2);
        CHECK(ds.meta().n_views == 2);
        CHECK(ds.frame_count() == 12);

        SUBCASE("per-frame artifacts exist and load") {
            ImageF ego = ds.load_ego(0);
            CHECK(ego.width == 64);
            IUVImage iuv = ds.load_ego_iuv(0);
            CHECK(iuv.part_count == 10);
            StoredPose sp = ds.load_pose(0);
            CHECK(sp.pose.rotations.size() == 18);
            CHECK(sp.pose.is_valid(1e-6));
            PinholeCamera cam = ds.load_view_camera(0, 1);
            CHECK(cam.width == 64);
            ImageU8 mask = ds.load_view_mask(0, 0);
            IUVImage view_iuv = ds.load_view_iuv(0, 0);
            for (size_t i = 0; i < view_iuv.pixel_count(); ++i)
                CHECK((mask.data[i] == 255) == (view_iuv.part[i] != 0));
        }
    }

    SUBCASE("reruns and worker counts are byte-identical") {
        generate_dataset(cfg, base / "w1");
        GenConfig cfg2 = cfg;
        cfg2.workers = 2;
        generate_dataset(cfg2, base / "w2");
        // worker count is echoed in meta.json config but must not affect frames
        CHECK(tree_hash(base / "w1" / "frames") == tree_hash(base / "w2" / "frames"));
        GenConfig cfg3 = cfg;
        generate_dataset(cfg3, base / "w3");
        CHECK(tree_hash(base / "w1") == tree_hash(base / "w3"));
    }

    SUBCASE("stored ego IUV equals a re-rasterization of the stored pose") {
        generate_dataset(cfg, base / "gt");
        Dataset ds = Dataset::open(base / "gt");
        Body body = build_canonical_body();
        for (int f : {0, 5, 11}) {
            StoredPose sp = ds.load_pose(f);
            auto posed = skin_mesh(body.skeleton, body.mesh, sp.pose);
            std::ifstream cam_in(ds.frame_dir(f) / "ego_camera.json");
            std::string text((std::istreambuf_iterator<char>(cam_in)),
                             std::istreambuf_iterator<char>());
            FisheyeCamera cam = fisheye_from_json(text);
            RasterOptions opts;
            opts.max_edge_m = 0.15;
            opts.near_m = cfg.ego_near_m;
            IUVImage fresh = rasterize(posed, body.mesh, cam, opts);
            ImageU16 stored = load_png16(ds.frame_dir(f) / "ego_iuv.png");
            CHECK(iuv_quantize(fresh).data == stored.data);
        }
    }

    SUBCASE("invalid configs are rejected") {
        GenConfig bad = cfg;
        bad.n_frames = 0;
        CHECK_THROWS_AS(generate_dataset(bad, base / "bad"), std::invalid_argument);
        GenConfig bad2 = cfg;
        bad2.split = 1.0;
        CHECK_THROWS_AS(generate_dataset(bad2, base / "bad2"), std::invalid_argument);
    }

    fs::remove_all(base);
}

TEST_CASE("ego framing: the wearer sees their own body") {
    GenConfig cfg;
    cfg.ego_size = 64;
    Body body = build_canonical_body(cfg.body);
    PoseSampler sampler(17, cfg.pose, body.skeleton);
    RasterOptions opts;
    opts.max_edge_m = 0.15;
    opts.near_m = cfg.ego_near_m;

    int framed = 0;
    const int n = 300;
    for (int f = 0; f < n; ++f) {
        BodyPose pose = sampler.pose_at(f * 3);
        auto posed = skin_mesh(body.skeleton, body.mesh, pose);
        FisheyeCamera cam = ego_camera_for_pose(cfg, body.skeleton, pose);
        IUVImage iuv = rasterize(posed, body.mesh, cam, opts);
        int fg = 0;
        for (size_t i = 0; i < iuv.pixel_count(); ++i) fg += iuv.part[i] != 0;
        if (fg > int(iuv.pixel_count() / 100)) ++framed;
    }
    CHECK(framed >= int(n * 0.95));
}

TEST_CASE("config json round-trip") {
    GenConfig cfg = tiny_config();
    cfg.pose.motion_scale = 0.7;
    cfg.pose.ranges["l_elbow"] = {{0, -0.4, 0}, {0, 0.3, 0}};
    GenConfig back = GenConfig::from_json(cfg.to_json());
    CHECK(back.n_frames == cfg.n_frames);
    CHECK(back.seed == cfg.seed);
    CHECK(back.pose.motion_scale == cfg.pose.motion_scale);
    CHECK(back.pose.ranges.at("l_elbow").center.y() == -0.4);
    CHECK(back.atlas.chart_size == cfg.atlas.chart_size);
}

TEST_CASE("import hooks: motion file and texture directory") {
    fs::path base = fs::temp_directory_path() / "egorender_hooks_test";
    fs::remove_all(base);
    fs::create_directories(base);

    Body body = build_canonical_body();
    // two-frame motion file: rest pose, then bent elbows
    {
        std::ofstream out(base / "motion.json");
        out << "[";
        for (int f = 0; f < 2; ++f) {
            out << (f ? "," : "") << "[";
            for (int j = 0; j < body.skeleton.size(); ++j) {
                double bend = (f == 1 && body.skeleton.joints[j].name == "l_elbow") ? -0.9 : 0.0;
                out << (j ? "," : "") << "[0," << bend << ",0]";
            }
            out << "]";
        }
        out << "]";
    }
    GenConfig cfg = tiny_config();
    cfg.n_frames = 4;
    cfg.n_external_views = 1;
    cfg.motion_file = base / "motion.json";
    generate_dataset(cfg, base / "ds");
    Dataset ds = Dataset::open(base / "ds");
    // frames 0 and 2 are the rest pose; 1 and 3 have the bent elbow
    StoredPose p0 = ds.load_pose(0), p1 = ds.load_pose(1), p2 = ds.load_pose(2);
    int elbow = body.skeleton.index_of("l_elbow");
    CHECK((p0.pose.rotations[elbow] - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p1.pose.rotations[elbow] - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 0.1);
    CHECK((p2.pose.rotations[elbow] - p0.pose.rotations[elbow]).cwiseAbs().maxCoeff() < 1e-12);

    // texture import: a solid-color atlas png is picked up verbatim
    AtlasLayout layout;
    ImageU8 solid(layout.atlas_width(), layout.atlas_height(), 3);
    for (size_t i = 0; i < solid.data.size(); i += 3) {
        solid.data[i] = 255;
        solid.data[i + 1] = 0;
        solid.data[i + 2] = 128;
    }
    fs::create_directories(base / "tex");
    save_png(base / "tex" / "atlas0.png", solid);
    TextureStack t = sample_texture(1, 0, layout, base / "tex");
    CHECK(t.at(3, 3, 0) == 1.0f);
    CHECK(t.at(3, 3, 1) == 0.0f);

    fs::remove_all(base);
}

TEST_SUITE_END();
