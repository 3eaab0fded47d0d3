#include "egorender/body.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <stdexcept>

#include "egorender/common.hpp"

using nlohmann::json;

namespace ego {

namespace {

constexpr int kJointCount = 18;

// Canonical joint table. Parent index < child index throughout.
const char* kJointNames[kJointCount] = {
    "pelvis",     "spine",    "neck",    "head",       "l_shoulder", "l_elbow",
    "l_wrist",    "r_shoulder", "r_elbow", "r_wrist",  "l_hip",      "l_knee",
    "l_ankle",    "l_toe",    "r_hip",   "r_knee",     "r_ankle",    "r_toe"};

const int kJointParents[kJointCount] = {-1, 0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 11, 12, 0, 14, 15, 16};

}  // namespace

int Skeleton::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (joints[i].name == name) return i;
    throw std::invalid_argument("skeleton: no joint named " + name);
}

BodyPose BodyPose::rest(int joint_count) {
    BodyPose p;
    p.rotations.assign(joint_count, Eigen::Matrix3d::Identity());
    return p;
}

bool BodyPose::is_valid(double tol) const {
    if (!root.is_valid(tol)) return false;
    for (const auto& r : rotations) {
        Eigen::Matrix3d err = r.transpose() * r - Eigen::Matrix3d::Identity();
        if (err.cwiseAbs().maxCoeff() > tol) return false;
        if (std::abs(r.determinant() - 1.0) > tol) return false;
    }
    return true;
}

double BodyMesh::max_rest_edge() const {
    double m = 0;
    for (const auto& f : faces)
        for (int e = 0; e < 3; ++e) {
            double len = (vertices[f[e]] - vertices[f[(e + 1) % 3]]).cast<double>().norm();
            m = std::max(m, len);
        }
    return m;
}

const std::array<std::string, 15>& JointTargets15::names() {
    static const std::array<std::string, 15> n = {
        "neck",   "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist", "r_wrist", "l_hip",
        "r_hip",  "l_knee",     "r_knee",     "l_ankle", "r_ankle", "l_toe",   "r_toe"};
    return n;
}

namespace {

Skeleton make_skeleton(const BodyConfig& c) {
    const double half_torso = c.torso_len * 0.5;
    const Eigen::Vector3d offsets[kJointCount] = {
        {0, 0, 0},                            // pelvis
        {0, half_torso, 0},                   // spine
        {0, half_torso, 0},                   // neck
        {0, c.neck_to_head, 0},               // head
        {c.shoulder_x, c.shoulder_y, 0},      // l_shoulder
        {c.upper_arm, 0, 0},                  // l_elbow
        {c.forearm, 0, 0},                    // l_wrist
        {-c.shoulder_x, c.shoulder_y, 0},     // r_shoulder
        {-c.upper_arm, 0, 0},                 // r_elbow
        {-c.forearm, 0, 0},                   // r_wrist
        {c.hip_x, c.hip_y, 0},                // l_hip
        {0, -c.thigh, 0},                     // l_knee
        {0, -c.shin, 0},                      // l_ankle
        {0, -c.toe_drop, c.toe_forward},      // l_toe
        {-c.hip_x, c.hip_y, 0},               // r_hip
        {0, -c.thigh, 0},                     // r_knee
        {0, -c.shin, 0},                      // r_ankle
        {0, -c.toe_drop, c.toe_forward},      // r_toe
    };
    Skeleton s;
    s.joints.reserve(kJointCount);
    for (int i = 0; i < kJointCount; ++i)
        s.joints.push_back({kJointNames[i], kJointParents[i], offsets[i]});
    return s;
}

// One tube of a capsule chain, with its own UV chart and axial sub-range.
struct PartSpec {
    std::string name;
    // chain of (joint index, axial parameter along the tube). Weights blend
    // between consecutive chain joints around their breakpoints.
    std::vector<std::pair<int, double>> chain;
    Eigen::Vector3d axis_start, axis_end;  // rest-space tube axis for the FULL capsule
    double radius;
    double t0, t1;  // axial sub-range of the full capsule covered by this part
};

std::vector<PartSpec> make_part_specs(const BodyConfig& c, const Skeleton& skel) {
    auto pos = [&](const char* name) {
        int i = skel.index_of(name);
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        while (i >= 0) {
            p += skel.joints[i].rest_offset;
            i = skel.joints[i].parent;
        }
        return p;
    };

    struct Capsule {
        std::string name;
        std::vector<std::pair<int, double>> chain;
        Eigen::Vector3d a, b;
        double radius;
        int subdivisions10, subdivisions24;
    };

    const Eigen::Vector3d pelvis = pos("pelvis"), neck = pos("neck"), head = pos("head");
    std::vector<Capsule> caps;
    caps.push_back({"head",
                    {{skel.index_of("neck"), 0.0}, {skel.index_of("head"), 0.55}},
                    neck,
                    head + Eigen::Vector3d(0, 0.8 * c.r_head, 0),
                    c.r_head,
                    1, 1});
    caps.push_back({"torso",
                    {{skel.index_of("pelvis"), 0.0},
                     {skel.index_of("spine"), 0.5},
                     {skel.index_of("neck"), 1.0}},
                    pelvis,
                    neck,
                    c.r_torso,
                    1, 3});
    for (const char* side : {"l", "r"}) {
        std::string s(side);
        auto shoulder = pos((s + "_shoulder").c_str()), elbow = pos((s + "_elbow").c_str()),
             wrist = pos((s + "_wrist").c_str());
        Eigen::Vector3d arm_dir = (wrist - elbow).normalized();
        caps.push_back({s + "_upper_arm",
                        {{skel.index_of(s + "_shoulder"), 0.0}, {skel.index_of(s + "_elbow"), 1.0}},
                        shoulder,
                        elbow,
                        c.r_upper_arm,
                        1, 2});
        caps.push_back({s + "_lower_arm",
                        {{skel.index_of(s + "_elbow"), 0.0}, {skel.index_of(s + "_wrist"), 1.0}},
                        elbow,
                        wrist + arm_dir * c.hand_stub,
                        c.r_forearm,
                        1, 2});
        auto hip = pos((s + "_hip").c_str()), knee = pos((s + "_knee").c_str()),
             ankle = pos((s + "_ankle").c_str());
        caps.push_back({s + "_upper_leg",
                        {{skel.index_of(s + "_hip"), 0.0}, {skel.index_of(s + "_knee"), 1.0}},
                        hip,
                        knee,
                        c.r_thigh,
                        1, 3});
        caps.push_back({s + "_lower_leg",
                        {{skel.index_of(s + "_knee"), 0.0}, {skel.index_of(s + "_ankle"), 1.0}},
                        knee,
                        ankle + Eigen::Vector3d(0, -0.4 * c.r_shin, 0),
                        c.r_shin,
                        1, 3});
    }

    std::vector<PartSpec> parts;
    for (const auto& cap : caps) {
        int n = c.part_count == 24 ? cap.subdivisions24 : cap.subdivisions10;
        for (int k = 0; k < n; ++k) {
            PartSpec p;
            p.name = n == 1 ? cap.name : cap.name + "_" + std::to_string(k + 1);
            p.chain = cap.chain;
            p.axis_start = cap.a;
            p.axis_end = cap.b;
            p.radius = cap.radius;
            p.t0 = double(k) / n;
            p.t1 = double(k + 1) / n;
            parts.push_back(p);
        }
    }
    return parts;
}

// Dyadic (multiples of 1/256) weights summing to exactly 1.
std::array<float, 4> quantize_weights(std::array<double, 4> w) {
    std::array<int, 4> q{};
    int total = 0;
    for (int i = 0; i < 4; ++i) {
        q[i] = int(std::lround(w[i] * 256.0));
        total += q[i];
    }
    // push the rounding slack onto the largest weight
    int imax = 0;
    for (int i = 1; i < 4; ++i)
        if (q[i] > q[imax]) imax = i;
    q[imax] += 256 - total;
    std::array<float, 4> out{};
    for (int i = 0; i < 4; ++i) out[i] = float(q[i]) / 256.0f;
    return out;
}

}  // namespace

std::vector<std::string> part_names(int part_count) {
    BodyConfig c;
    c.part_count = part_count;
    Skeleton skel = make_skeleton(c);
    std::vector<std::string> names;
    for (const auto& p : make_part_specs(c, skel)) names.push_back(p.name);
    return names;
}

Body build_canonical_body(const BodyConfig& c) {
    for (double v : {c.torso_len, c.neck_to_head, c.upper_arm, c.forearm, c.thigh, c.shin,
                     c.r_torso, c.r_head, c.r_upper_arm, c.r_forearm, c.r_thigh, c.r_shin,
                     c.target_edge_m, c.density})
        if (!(v > 0)) throw std::invalid_argument("build_canonical_body: non-positive proportion");
    if (c.part_count != 10 && c.part_count != 24)
        throw std::invalid_argument("build_canonical_body: part_count must be 10 or 24");

    Body body;
    body.skeleton = make_skeleton(c);
    auto parts = make_part_specs(c, body.skeleton);
    BodyMesh& mesh = body.mesh;
    mesh.part_count = int(parts.size());

    const double per_m = c.density / c.target_edge_m;
    for (size_t pi = 0; pi < parts.size(); ++pi) {
        const PartSpec& p = parts[pi];
        Eigen::Vector3d axis = p.axis_end - p.axis_start;
        double full_len = axis.norm();
        double seg_len = full_len * (p.t1 - p.t0);
        Eigen::Vector3d dir = axis / full_len;
        // orthonormal frame around the tube axis
        Eigen::Vector3d ref = std::abs(dir.y()) < 0.9 ? Eigen::Vector3d(0, 1, 0)
                                                      : Eigen::Vector3d(0, 0, 1);
        Eigen::Vector3d u_axis = (ref - dir * ref.dot(dir)).normalized();
        Eigen::Vector3d w_axis = dir.cross(u_axis);

        int n_axial = std::max(2, int(std::ceil(seg_len * per_m)));
        int n_radial = std::max(6, int(std::ceil(2.0 * std::numbers::pi * p.radius * per_m)));

        int base = mesh.vertex_count();
        for (int row = 0; row <= n_axial; ++row) {
            double s = double(row) / n_axial;                   // chart v
            double t = p.t0 + s * (p.t1 - p.t0);                // full-capsule axial param
            Eigen::Vector3d center = p.axis_start + t * axis;
            // skin weights: linear cross-fade of width 2*band centered at each
            // interior chain breakpoint; the fades telescope so weights sum to 1
            std::array<double, 4> wd{};
            std::array<int, 4> jd{-1, -1, -1, -1};
            {
                const double band = 0.18;
                auto ramp_up = [&](double tk) {
                    if (t <= tk - band) return 0.0;
                    if (t >= tk + band) return 1.0;
                    return (t - (tk - band)) / (2.0 * band);
                };
                size_t nc = p.chain.size();
                int slot = 0;
                for (size_t k = 0; k < nc && slot < 4; ++k) {
                    double up = k == 0 ? 1.0 : ramp_up(p.chain[k].second);
                    double down = k + 1 == nc ? 1.0 : 1.0 - ramp_up(p.chain[k + 1].second);
                    double w = up * down;
                    if (w <= 0) continue;
                    jd[slot] = p.chain[k].first;
                    wd[slot] = w;
                    ++slot;
                }
            }
            auto wq = quantize_weights(wd);
            for (int k = 0; k < 4; ++k)
                if (jd[k] < 0) jd[k] = jd[0] < 0 ? 0 : jd[0];  // pad unused slots

            for (int col = 0; col <= n_radial; ++col) {
                double phi = 2.0 * std::numbers::pi * double(col % n_radial) / n_radial;
                Eigen::Vector3d pos =
                    center + p.radius * (std::cos(phi) * u_axis + std::sin(phi) * w_axis);
                mesh.vertices.push_back(pos.cast<float>());
                mesh.vertex_uv.push_back(Eigen::Vector2f(float(col) / float(n_radial), float(s)));
                mesh.vertex_part.push_back(int(pi) + 1);
                mesh.skin_joints.push_back(jd);
                mesh.skin_weights.push_back(wq);
            }
        }
        int stride = n_radial + 1;
        for (int row = 0; row < n_axial; ++row)
            for (int col = 0; col < n_radial; ++col) {
                int a = base + row * stride + col;
                int b = a + 1;
                int d = a + stride;
                int e = d + 1;
                // outward-facing winding (counter-clockwise seen from outside)
                mesh.faces.push_back({a, d, b});
                mesh.faces.push_back({b, d, e});
            }
    }
    return body;
}

std::vector<RigidTransform> fk_transforms(const Skeleton& skel, const BodyPose& pose) {
    if (int(pose.rotations.size()) != skel.size())
        throw std::invalid_argument("fk_transforms: pose/skeleton joint count mismatch");
    std::vector<RigidTransform> world(skel.size());
    for (int i = 0; i < skel.size(); ++i) {
        RigidTransform local{pose.rotations[i],
                             Eigen::Vector3d::Zero()};
        RigidTransform offset{Eigen::Matrix3d::Identity(), skel.joints[i].rest_offset};
        RigidTransform parent = skel.joints[i].parent < 0 ? pose.root : world[skel.joints[i].parent];
        world[i] = parent.compose(offset).compose(local);
    }
    return world;
}

std::vector<Eigen::Vector3d> forward_kinematics(const Skeleton& skel, const BodyPose& pose) {
    auto world = fk_transforms(skel, pose);
    std::vector<Eigen::Vector3d> out(world.size());
    for (size_t i = 0; i < world.size(); ++i) out[i] = world[i].translation;
    return out;
}

std::array<int, 15> target_joint_indices(const Skeleton& skel) {
    std::array<int, 15> idx{};
    const auto& names = JointTargets15::names();
    for (int i = 0; i < 15; ++i) idx[i] = skel.index_of(names[i]);
    return idx;
}

JointTargets15 targets_from_fk(const Skeleton& skel, const BodyPose& pose) {
    auto joints = forward_kinematics(skel, pose);
    auto idx = target_joint_indices(skel);
    JointTargets15 t;
    for (int i = 0; i < 15; ++i) t.positions[i] = joints[idx[i]];
    return t;
}

std::vector<Eigen::Vector3d> skin_mesh(const Skeleton& skel, const BodyMesh& mesh,
                                       const BodyPose& pose) {
    auto world = fk_transforms(skel, pose);
    BodyPose rest = BodyPose::rest(skel.size());
    auto rest_world = fk_transforms(skel, rest);

    std::vector<Eigen::Matrix<double, 3, 4>> skinning(skel.size());
    for (int j = 0; j < skel.size(); ++j) {
        RigidTransform g = world[j].compose(rest_world[j].inverse());
        skinning[j].leftCols<3>() = g.rotation;
        skinning[j].col(3) = g.translation;
    }

    std::vector<Eigen::Vector3d> out(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        Eigen::Matrix<double, 3, 4> m = Eigen::Matrix<double, 3, 4>::Zero();
        for (int k = 0; k < 4; ++k) {
            float w = mesh.skin_weights[v][k];
            if (w != 0.f) m += double(w) * skinning[mesh.skin_joints[v][k]];
        }
        Eigen::Vector3d p = mesh.vertices[v].cast<double>();
        out[v] = m.leftCols<3>() * p + m.col(3);
    }
    return out;
}

IkResult solve_ik(const Skeleton& skel, const JointTargets15& targets, const BodyPose& init,
                  const IkOptions& opts) {
    for (const auto& p : targets.positions)
        if (!p.allFinite()) throw std::invalid_argument("solve_ik: non-finite target position");
    for (double cnf : targets.confidence)
        if (!std::isfinite(cnf) || cnf < 0) throw std::invalid_argument("solve_ik: bad confidence");

    const int J = skel.size();
    const auto tidx = target_joint_indices(skel);
    const int n_params = 3 + 3 * J;  // root translation + per-joint rotation increments

    auto residual_vector = [&](const BodyPose& pose, std::vector<Eigen::Vector3d>& joints) {
        joints = forward_kinematics(skel, pose);
        Eigen::VectorXd r(45);
        for (int i = 0; i < 15; ++i)
            r.segment<3>(3 * i) =
                targets.confidence[i] * (targets.positions[i] - joints[tidx[i]]);
        return r;
    };
    auto mean_residual = [&](const std::vector<Eigen::Vector3d>& joints) {
        double sum = 0;
        int n = 0;
        for (int i = 0; i < 15; ++i) {
            if (targets.confidence[i] <= 0) continue;
            sum += (targets.positions[i] - joints[tidx[i]]).norm();
            ++n;
        }
        return n ? sum / n : 0.0;
    };
    auto is_ancestor = [&](int anc, int j) {
        while (j >= 0) {
            if (j == anc) return true;
            j = skel.joints[j].parent;
        }
        return false;
    };

    BodyPose pose = init;
    std::vector<Eigen::Vector3d> joints;
    Eigen::VectorXd r = residual_vector(pose, joints);
    IkResult best{pose, mean_residual(joints), 0};

    double lambda = opts.damping;
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if (best.mean_residual_m < opts.tolerance_m) break;

        auto world = fk_transforms(skel, pose);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(45, n_params);
        for (int i = 0; i < 15; ++i) {
            double cnf = targets.confidence[i];
            if (cnf <= 0) continue;
            const Eigen::Vector3d p = joints[tidx[i]];
            jac.block<3, 3>(3 * i, 0) = cnf * Eigen::Matrix3d::Identity();
            for (int j = 0; j < J; ++j) {
                if (!is_ancestor(j, tidx[i])) continue;
                Eigen::Vector3d arm = p - world[j].translation;
                for (int a = 0; a < 3; ++a) {
                    Eigen::Vector3d axis = Eigen::Vector3d::Unit(a);
                    jac.block<3, 1>(3 * i, 3 + 3 * j + a) = cnf * axis.cross(arm);
                }
            }
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 6 && !accepted; ++attempt) {
            Eigen::MatrixXd h = jac.transpose() * jac;
            h.diagonal().array() += lambda * lambda;
            Eigen::VectorXd delta = h.ldlt().solve(jac.transpose() * r);

            BodyPose trial = pose;
            trial.root.translation += delta.segment<3>(0);
            for (int j = 0; j < J; ++j) {
                Eigen::Vector3d w = delta.segment<3>(3 + 3 * j);
                double angle = w.norm();
                if (angle < 1e-15) continue;
                Eigen::Matrix3d inc = axis_angle(w / angle, angle);
                Eigen::Matrix3d parent_rot = skel.joints[j].parent < 0
                                                 ? pose.root.rotation * Eigen::Matrix3d::Identity()
                                                 : world[skel.joints[j].parent].rotation;
                trial.rotations[j] = orthonormalize(parent_rot.transpose() * inc * parent_rot *
                                                    pose.rotations[j]);
            }

            std::vector<Eigen::Vector3d> trial_joints;
            Eigen::VectorXd trial_r = residual_vector(trial, trial_joints);
            if (trial_r.squaredNorm() < r.squaredNorm()) {
                pose = trial;
                r = trial_r;
                joints = trial_joints;
                lambda = std::max(1e-6, lambda * 0.7);
                accepted = true;
                double m = mean_residual(joints);
                if (m < best.mean_residual_m) best = {pose, m, iter + 1};
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) break;  // stuck; return best so far
    }
    best.iterations = iter;
    return best;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kBodyMagic[8] = {'E', 'G', 'R', 'B', 'O', 'D', 'Y', '1'};

template <typename T>
void write_block(std::ofstream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_block(std::ifstream& in, size_t count) {
    std::vector<T> v(count);
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(T)));
    if (!in) throw std::runtime_error("body file: truncated block");
    return v;
}

}  // namespace

void save_body(const std::filesystem::path& path, const Body& body) {
    json header;
    header["version"] = 1;
    json joints = json::array();
    for (const auto& j : body.skeleton.joints)
        joints.push_back({{"name", j.name},
                          {"parent", j.parent},
                          {"offset", {j.rest_offset.x(), j.rest_offset.y(), j.rest_offset.z()}}});
    header["joints"] = joints;
    header["part_count"] = body.mesh.part_count;
    header["vertex_count"] = body.mesh.vertex_count();
    header["face_count"] = body.mesh.faces.size();
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingArtifactError("cannot write body file: " + path.string());
    out.write(kBodyMagic, 8);
    uint32_t hlen = uint32_t(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(htext.data(), std::streamsize(htext.size()));

    const BodyMesh& m = body.mesh;
    std::vector<float> verts, uvs, weights;
    std::vector<uint32_t> faces, sjoints;
    std::vector<uint16_t> parts;
    for (const auto& v : m.vertices) {
        verts.push_back(v.x());
        verts.push_back(v.y());
        verts.push_back(v.z());
    }
    for (const auto& uv : m.vertex_uv) {
        uvs.push_back(uv.x());
        uvs.push_back(uv.y());
    }
    for (const auto& w : m.skin_weights) weights.insert(weights.end(), w.begin(), w.end());
    for (const auto& sj : m.skin_joints)
        for (int k : sj) sjoints.push_back(uint32_t(k < 0 ? 0xffffffffu : uint32_t(k)));
    for (const auto& f : m.faces)
        for (int k : f) faces.push_back(uint32_t(k));
    for (int p : m.vertex_part) parts.push_back(uint16_t(p));

    write_block(out, verts);
    write_block(out, uvs);
    write_block(out, weights);
    write_block(out, sjoints);
    write_block(out, faces);
    write_block(out, parts);
}

Body load_body(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open body file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kBodyMagic, 8) != 0)
        throw std::runtime_error("body file: bad magic: " + path.string());
    uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    json header = json::parse(htext);

    Body body;
    for (const auto& j : header.at("joints")) {
        auto off = j.at("offset").get<std::vector<double>>();
        body.skeleton.joints.push_back(
            {j.at("name").get<std::string>(), j.at("parent").get<int>(), {off[0], off[1], off[2]}});
    }
    size_t nv = header.at("vertex_count").get<size_t>();
    size_t nf = header.at("face_count").get<size_t>();
    body.mesh.part_count = header.at("part_count").get<int>();

    auto verts = read_block<float>(in, nv * 3);
    auto uvs = read_block<float>(in, nv * 2);
    auto weights = read_block<float>(in, nv * 4);
    auto sjoints = read_block<uint32_t>(in, nv * 4);
    auto faces = read_block<uint32_t>(in, nf * 3);
    auto parts = read_block<uint16_t>(in, nv);

    BodyMesh& m = body.mesh;
    m.vertices.resize(nv);
    m.vertex_uv.resize(nv);
    m.skin_weights.resize(nv);
    m.skin_joints.resize(nv);
    m.vertex_part.resize(nv);
    for (size_t i = 0; i < nv; ++i) {
        m.vertices[i] = {verts[3 * i], verts[3 * i + 1], verts[3 * i + 2]};
        m.vertex_uv[i] = {uvs[2 * i], uvs[2 * i + 1]};
        for (int k = 0; k < 4; ++k) {
            m.skin_weights[i][k] = weights[4 * i + k];
            uint32_t sj = sjoints[4 * i + k];
            m.skin_joints[i][k] = sj == 0xffffffffu ? -1 : int(sj);
        }
        m.vertex_part[i] = parts[i];
    }
    m.faces.resize(nf);
    for (size_t i = 0; i < nf; ++i)
        m.faces[i] = {int(faces[3 * i]), int(faces[3 * i + 1]), int(faces[3 * i + 2])};
    return body;
}

}  // namespace ego
