#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "egorender/body.hpp"
#include "egorender/geometry.hpp"
#include "egorender/image.hpp"
#include "egorender/raster.hpp"
#include "egorender/texture.hpp"

namespace ego {

// One dataset frame on disk (images are loaded lazily through the accessors).
struct FrameRecord {
    int id = 0;
    int texture_id = 0;
    int background_id = 0;
    int n_views = 0;
};

struct DatasetMeta {
    std::string config_json;  // GenConfig echo
    AtlasLayout atlas;
    int part_count = 10;
    int joint_count = 0;
    int ego_size = 0;
    int view_size = 0;
    int n_views = 0;
    std::vector<int> train_ids, test_ids;
};

struct StoredPose {
    BodyPose pose;
    JointTargets15 joints;
};

class Dataset {
public:
    static Dataset open(const std::filesystem::path& dir);

    const DatasetMeta& meta() const { return meta_; }
    const std::filesystem::path& dir() const { return dir_; }
    int frame_count() const { return int(meta_.train_ids.size() + meta_.test_ids.size()); }

    std::filesystem::path frame_dir(int frame) const;
    ImageF load_ego(int frame) const;
    IUVImage load_ego_iuv(int frame) const;
    StoredPose load_pose(int frame) const;
    ImageF load_view_image(int frame, int view) const;
    IUVImage load_view_iuv(int frame, int view) const;
    ImageU8 load_view_mask(int frame, int view) const;
    PinholeCamera load_view_camera(int frame, int view) const;

private:
    std::filesystem::path dir_;
    DatasetMeta meta_;
};

}  // namespace ego
