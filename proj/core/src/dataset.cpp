#include "egorender/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "egorender/common.hpp"

using nlohmann::json;

namespace ego {

Dataset Dataset::open(const std::filesystem::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) throw MissingArtifactError("dataset: cannot open " + (dir / "meta.json").string());
    json meta = json::parse(in);

    Dataset ds;
    ds.dir_ = dir;
    ds.meta_.config_json = meta.at("config").dump();
    ds.meta_.atlas.part_count = meta.at("atlas").at("part_count").get<int>();
    ds.meta_.atlas.chart_size = meta.at("atlas").at("chart_size").get<int>();
    ds.meta_.atlas.grid_cols = meta.at("atlas").at("grid_cols").get<int>();
    ds.meta_.part_count = meta.at("part_count").get<int>();
    ds.meta_.joint_count = meta.at("joint_count").get<int>();
    ds.meta_.ego_size = meta.at("ego_size").get<int>();
    ds.meta_.view_size = meta.at("view_size").get<int>();
    ds.meta_.n_views = meta.at("n_views").get<int>();
    ds.meta_.train_ids = meta.at("train_ids").get<std::vector<int>>();
    ds.meta_.test_ids = meta.at("test_ids").get<std::vector<int>>();
    return ds;
}

std::filesystem::path Dataset::frame_dir(int frame) const {
    char name[16];
    std::snprintf(name, sizeof name, "%06d", frame);
    return dir_ / "frames" / name;
}

ImageF Dataset::load_ego(int frame) const { return dequantize(load_png8(frame_dir(frame) / "ego.png")); }

IUVImage Dataset::load_ego_iuv(int frame) const {
    return load_iuv_png(frame_dir(frame) / "ego_iuv.png", meta_.part_count);
}

StoredPose Dataset::load_pose(int frame) const {
    std::ifstream in(frame_dir(frame) / "pose.json");
    if (!in) throw MissingArtifactError("dataset: missing pose.json for frame " + std::to_string(frame));
    json j = json::parse(in);

    StoredPose out;
    const auto& rots = j.at("rotations");
    out.pose.rotations.resize(rots.size());
    for (size_t r = 0; r < rots.size(); ++r)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) out.pose.rotations[r](a, b) = rots[r][3 * a + b].get<double>();
    const auto& root = j.at("root");
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out.pose.root.rotation(a, b) = root.at("rotation")[3 * a + b];
    auto tr = root.at("translation").get<std::vector<double>>();
    out.pose.root.translation = {tr[0], tr[1], tr[2]};
    const auto& pts = j.at("joints15");
    for (int i = 0; i < 15; ++i)
        out.joints.positions[i] = {pts[i][0].get<double>(), pts[i][1].get<double>(),
                                   pts[i][2].get<double>()};
    return out;
}

ImageF Dataset::load_view_image(int frame, int view) const {
    return dequantize(load_png8(frame_dir(frame) / "views" / std::to_string(view) / "img.png"));
}

IUVImage Dataset::load_view_iuv(int frame, int view) const {
    return load_iuv_png(frame_dir(frame) / "views" / std::to_string(view) / "iuv.png",
                        meta_.part_count);
}

ImageU8 Dataset::load_view_mask(int frame, int view) const {
    return load_png8(frame_dir(frame) / "views" / std::to_string(view) / "mask.png");
}

PinholeCamera Dataset::load_view_camera(int frame, int view) const {
    std::ifstream in(frame_dir(frame) / "views" / std::to_string(view) / "camera.json");
    if (!in) throw MissingArtifactError("dataset: missing camera.json");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return pinhole_from_json(text);
}

}  // namespace ego
