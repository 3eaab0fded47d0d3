#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "egorender/raster.hpp"
#include "egorender/rng.hpp"
#include "egorender/texture.hpp"

using namespace ego;

TEST_SUITE_BEGIN("texture");

TEST_CASE("all-background iuv extracts a zero stack with empty visibility") {
    AtlasLayout layout;
    ImageF img(16, 16, 3);
    IUVImage iuv = IUVImage::background(16, 16, layout.part_count);
    TextureStack te = extract_partial_texture(img, iuv, layout);
    for (float v : te.data) CHECK(v == 0.f);
    CHECK(std::count(te.visibility.begin(), te.visibility.end(), 1) == 0);
}

TEST_CASE("a single pixel splats to the nearest texel of its chart") {
    AtlasLayout layout;
    ImageF img(4, 4, 3);
    img.at(1, 2, 0) = 0.25f;
    img.at(1, 2, 1) = 0.5f;
    img.at(1, 2, 2) = 0.75f;
    IUVImage iuv = IUVImage::background(4, 4, layout.part_count);
    size_t p = iuv.idx(1, 2);
    iuv.part[p] = 2;
    iuv.u[p] = 0.5f;
    iuv.v[p] = 0.5f;
    iuv.depth[p] = 1.f;

    SUBCASE("pre-gutter: exactly one visible texel") {
        TextureStack te = extract_partial_texture(img, iuv, layout, /*apply_gutter=*/false);
        CHECK(std::count(te.visibility.begin(), te.visibility.end(), 1) == 1);
        auto [ox, oy] = layout.chart_origin(2);
        int s = layout.chart_size;
        CHECK(te.at(ox + s / 2, oy + s / 2, 0) == 0.25f);
        CHECK(te.at(ox + s / 2, oy + s / 2, 1) == 0.5f);
        CHECK(te.at(ox + s / 2, oy + s / 2, 2) == 0.75f);
    }
    SUBCASE("gutter replicates the splat into its 8 neighbours") {
        TextureStack te = extract_partial_texture(img, iuv, layout);
        CHECK(std::count(te.visibility.begin(), te.visibility.end(), 1) == 9);
        auto [ox, oy] = layout.chart_origin(2);
        int s = layout.chart_size;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                CHECK(te.at(ox + s / 2 + dx, oy + s / 2 + dy, 1) == 0.5f);
    }
}

TEST_CASE("texel collisions keep the pixel with the smallest depth") {
    AtlasLayout layout;
    ImageF img(2, 1, 3);
    img.at(0, 0, 0) = 0.2f;
    img.at(1, 0, 0) = 0.9f;
    IUVImage iuv = IUVImage::background(2, 1, layout.part_count);
    for (int x = 0; x < 2; ++x) {
        size_t p = iuv.idx(x, 0);
        iuv.part[p] = 1;
        iuv.u[p] = 0.5f;
        iuv.v[p] = 0.5f;
    }
    iuv.depth[iuv.idx(0, 0)] = 2.0f;
    iuv.depth[iuv.idx(1, 0)] = 1.0f;  // nearer; must win
    TextureStack te = extract_partial_texture(img, iuv, layout, false);
    auto [ox, oy] = layout.chart_origin(1);
    int s = layout.chart_size;
    CHECK(te.at(ox + s / 2, oy + s / 2, 0) == 0.9f);
}

TEST_CASE("extraction dimension mismatch is rejected") {
    AtlasLayout layout;
    ImageF img(8, 8, 3);
    IUVImage iuv = IUVImage::background(4, 4, layout.part_count);
    CHECK_THROWS_AS(extract_partial_texture(img, iuv, layout), std::invalid_argument);
}

TEST_CASE("extraction is idempotent and visibility-sound") {
    AtlasLayout layout;
    Rng rng(21);
    ImageF img(32, 32, 3);
    IUVImage iuv = IUVImage::background(32, 32, layout.part_count);
    for (size_t i = 0; i < iuv.pixel_count(); ++i) {
        if (rng.uniform01() < 0.5) continue;
        iuv.part[i] = uint16_t(1 + rng.below(layout.part_count));
        iuv.u[i] = float(rng.uniform01());
        iuv.v[i] = float(rng.uniform01());
        iuv.depth[i] = float(rng.uniform(0.5, 2.0));
        for (int c = 0; c < 3; ++c) img.data[3 * i + c] = float(rng.uniform01());
    }
    TextureStack a = extract_partial_texture(img, iuv, layout, false);
    TextureStack b = extract_partial_texture(img, iuv, layout, false);
    CHECK(a.data == b.data);
    CHECK(a.visibility == b.visibility);
    // nonzero only where visible (pre-gutter)
    for (size_t t = 0; t < a.texel_count(); ++t)
        if (!a.visibility[t])
            for (int c = 0; c < 3; ++c) CHECK(a.data[t * 3 + c] == 0.f);
}

TEST_CASE("render-extract round-trip reproduces a known chart") {
    // one flat quad of part 1, mapped 1:1 to its chart, filling the camera
    AtlasLayout layout;
    layout.part_count = 1;
    layout.chart_size = 32;
    layout.grid_cols = 1;

    Rng rng(8);
    TextureStack chart(layout, 3);
    const int s = layout.chart_size;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            chart.at(x, y, 0) = 0.1f + 0.8f * float(x) / s;
            chart.at(x, y, 1) = 0.1f + 0.8f * float(y) / s;
            chart.at(x, y, 2) = 0.5f + 0.3f * std::sin(0.4f * x) * std::cos(0.4f * y);
        }

    PinholeCamera cam;
    const int n = 128;
    cam.width = cam.height = n;
    cam.fx = cam.fy = n;  // quad [-0.5,0.5]^2 at z=1 covers the full frame
    cam.principal_point = {n / 2.0, n / 2.0};

    std::vector<Eigen::Vector3d> positions = {
        {-0.5, -0.5, 1.0}, {0.5, -0.5, 1.0}, {-0.5, 0.5, 1.0}, {0.5, 0.5, 1.0}};
    BodyMesh mesh;
    mesh.part_count = 1;
    const Eigen::Vector2f uvs[4] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (int i = 0; i < 4; ++i) {
        mesh.vertices.push_back(Eigen::Vector3f::Zero());
        mesh.vertex_uv.push_back(uvs[i]);
        mesh.vertex_part.push_back(1);
        mesh.skin_joints.push_back({0, 0, 0, 0});
        mesh.skin_weights.push_back({1, 0, 0, 0});
    }
    mesh.faces.push_back({0, 2, 1});
    mesh.faces.push_back({1, 2, 3});

    IUVImage iuv = rasterize(positions, mesh, cam);
    int fg = 0;
    for (size_t i = 0; i < iuv.pixel_count(); ++i) fg += iuv.part[i] != 0;
    REQUIRE(fg > int(iuv.pixel_count() * 0.95));

    FeatureImage rendered = feature_render(chart, iuv);
    ImageF img(n, n, 3);
    img.data.assign(rendered.data.begin(), rendered.data.end());

    TextureStack recovered = extract_partial_texture(img, iuv, layout, false);
    double err_sum = 0;
    int visible = 0;
    for (size_t t = 0; t < recovered.texel_count(); ++t) {
        if (!recovered.visibility[t]) continue;
        ++visible;
        for (int c = 0; c < 3; ++c)
            err_sum += std::abs(recovered.data[t * 3 + c] - chart.data[t * 3 + c]) / 3.0;
    }
    REQUIRE(visible > int(recovered.texel_count() * 0.9));
    CHECK(err_sum / visible < 2.0 / 255.0);
}

TEST_CASE("init_implicit_stack basics") {
    AtlasLayout layout;
    ImageF img1(4, 4, 3), img2(4, 4, 3);
    IUVImage iuv1 = IUVImage::background(4, 4, layout.part_count);
    IUVImage iuv2 = IUVImage::background(4, 4, layout.part_count);

    auto set_pixel = [&](ImageF& img, IUVImage& iuv, float value) {
        size_t p = iuv.idx(0, 0);
        iuv.part[p] = 1;
        iuv.u[p] = 0.5f;
        iuv.v[p] = 0.5f;
        iuv.depth[p] = 1.f;
        for (int c = 0; c < 3; ++c) img.data[3 * p + c] = value;
    };
    set_pixel(img1, iuv1, 0.2f);
    set_pixel(img2, iuv2, 0.4f);

    SUBCASE("empty record list is rejected") {
        CHECK_THROWS_AS(init_implicit_stack({}, layout), std::invalid_argument);
    }
    SUBCASE("single record copies its T_e on visible texels") {
        TextureStack tm = init_implicit_stack({{&img1, &iuv1}}, layout);
        TextureStack te = extract_partial_texture(img1, iuv1, layout, false);
        for (size_t t = 0; t < te.texel_count(); ++t)
            if (te.visibility[t])
                for (int c = 0; c < 3; ++c) CHECK(tm.data[t * 3 + c] == te.data[t * 3 + c]);
    }
    SUBCASE("two records average; unseen texels default to 0.5") {
        TextureStack tm = init_implicit_stack({{&img1, &iuv1}, {&img2, &iuv2}}, layout);
        auto [ox, oy] = layout.chart_origin(1);
        int s = layout.chart_size;
        CHECK(tm.at(ox + s / 2, oy + s / 2, 0) == doctest::Approx(0.3).epsilon(1e-7));
        CHECK(tm.at(ox, oy, 0) == 0.5f);  // never visible
    }
    SUBCASE("permutation invariance") {
        TextureStack a = init_implicit_stack({{&img1, &iuv1}, {&img2, &iuv2}}, layout);
        TextureStack b = init_implicit_stack({{&img2, &iuv2}, {&img1, &iuv1}}, layout);
        CHECK(a.data == b.data);
    }
}

TEST_CASE("compose_global concatenates channels in (T_e, T_m) order") {
    AtlasLayout layout;
    Rng rng(4);
    TextureStack te(layout, 3), tm(layout, 3);
    for (auto& v : tm.data) v = float(rng.uniform01());

    TextureStack tg = compose_global(te, tm);
    CHECK(tg.channels == 6);
    for (size_t t = 0; t < tg.texel_count(); ++t) {
        for (int c = 0; c < 3; ++c) CHECK(tg.data[t * 6 + c] == 0.f);  // zero T_e
        CHECK(tg.data[t * 6 + 3] == tm.data[t * 3 + 0]);  // channel 4 of T_g == channel 1 of T_m
    }

    AtlasLayout other;
    other.chart_size = 32;
    TextureStack mismatched(other, 3);
    CHECK_THROWS_AS(compose_global(te, mismatched), std::invalid_argument);
}

TEST_CASE("texture stack file round-trip") {
    namespace fs = std::filesystem;
    AtlasLayout layout;
    Rng rng(6);
    TextureStack stack(layout, 3);
    stack.visibility.assign(stack.texel_count(), 0);
    for (auto& v : stack.data) v = float(rng.uniform01());
    for (auto& v : stack.visibility) v = rng.uniform01() < 0.5 ? 1 : 0;

    fs::path tmp = fs::temp_directory_path() / "egorender_tex_test.bin";
    save_texture_stack(tmp, stack);
    TextureStack loaded = load_texture_stack(tmp);
    CHECK(loaded.layout == stack.layout);
    CHECK(loaded.channels == stack.channels);
    CHECK(loaded.data == stack.data);
    CHECK(loaded.visibility == stack.visibility);
    fs::remove(tmp);
}

TEST_CASE("texture preview emits an atlas-sized 8-bit image") {
    AtlasLayout layout;
    TextureStack stack(layout, 6);
    ImageU8 img = texture_preview(stack, 3);
    CHECK(img.width == layout.atlas_width());
    CHECK(img.height == layout.atlas_height());
    CHECK(img.channels == 3);
}

TEST_SUITE_END();
