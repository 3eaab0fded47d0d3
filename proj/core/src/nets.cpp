#include "egorender/nets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "egorender/common.hpp"

using nlohmann::json;

namespace ego {

nn::Tensor tensor_from_image(const ImageF& img) {
    nn::Tensor t(1, img.channels, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) t.at(0, c, y, x) = img.at(x, y, c);
    return t;
}

ImageF image_from_tensor(const nn::Tensor& t, int sample) {
    ImageF img(t.w, t.h, t.c);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            for (int c = 0; c < t.c; ++c) img.at(x, y, c) = t.at(sample, c, y, x);
    return img;
}

nn::Tensor tensor_from_feature(const FeatureImage& f) {
    nn::Tensor t(1, f.channels, f.height, f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            for (int c = 0; c < f.channels; ++c) t.at(0, c, y, x) = f.at(x, y, c);
    return t;
}

FeatureImage feature_from_tensor(const nn::Tensor& t, int sample) {
    FeatureImage f(t.w, t.h, t.c);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            for (int c = 0; c < t.c; ++c) f.at(x, y, c) = t.at(sample, c, y, x);
    return f;
}

// ---------------------------------------------------------------------------
// UNetBackbone

namespace detail {

UNetBackbone::UNetBackbone(int in_c, int base, int levels, Rng& rng) : levels_(levels) {
    enc_.push_back(nn::conv_block(in_c, base, 3, 1, rng));
    int ch = base;
    for (int i = 1; i < levels; ++i) {
        enc_.push_back(nn::conv_block(ch, ch * 2, 3, 2, rng));
        ch *= 2;
    }
    // decoder: up(deep) concat skip -> conv down to skip's width
    for (int i = levels - 1; i >= 1; --i) {
        int deep = base << i;
        int skip = base << (i - 1);
        dec_.push_back(nn::conv_block(deep + skip, skip, 3, 1, rng));
    }
    up_.resize(levels - 1);
}

nn::Tensor UNetBackbone::forward(const nn::Tensor& x) {
    enc_out_.assign(levels_, nn::Tensor());
    nn::Tensor cur = x;
    for (int i = 0; i < levels_; ++i) {
        cur = enc_[i]->forward(cur);
        enc_out_[i] = cur;
    }
    for (int d = 0; d < levels_ - 1; ++d) {
        int skip_level = levels_ - 2 - d;
        nn::Tensor up = up_[d].forward(cur);
        cur = dec_[d]->forward(nn::concat_channels(up, enc_out_[skip_level]));
    }
    return cur;
}

nn::Tensor UNetBackbone::backward(const nn::Tensor& dy) {
    std::vector<nn::Tensor> skip_grads(levels_);
    nn::Tensor cur = dy;
    for (int d = levels_ - 2; d >= 0; --d) {
        int skip_level = levels_ - 2 - d;
        nn::Tensor dcat = dec_[d]->backward(cur);
        nn::Tensor dup, dskip;
        int deep_c = dcat.c - enc_out_[skip_level].c;
        nn::split_channels(dcat, deep_c, dup, dskip);
        skip_grads[skip_level] = std::move(dskip);
        cur = up_[d].backward(dup);
    }
    for (int i = levels_ - 1; i >= 0; --i) {
        if (i < levels_ - 1 && skip_grads[i].size() > 0)
            for (size_t k = 0; k < cur.v.size(); ++k) cur.v[k] += skip_grads[i].v[k];
        cur = enc_[i]->backward(cur);
    }
    return cur;
}

void UNetBackbone::collect_params(const std::string& prefix, std::vector<nn::ParamBlock>& out) {
    for (size_t i = 0; i < enc_.size(); ++i)
        enc_[i]->collect_params(prefix + ".enc" + std::to_string(i), out);
    for (size_t i = 0; i < dec_.size(); ++i)
        dec_[i]->collect_params(prefix + ".dec" + std::to_string(i), out);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// EgoDPNet

namespace {
Rng seeded_rng(uint64_t seed) { return Rng(seed, 0x6e657473ull); }
}

EgoDPNet::EgoDPNet(const EgoDPNetConfig& cfg)
    : cfg_(cfg),
      backbone_([&] {
          Rng rng = seeded_rng(cfg.seed);
          return detail::UNetBackbone(3, cfg.base_width, 4, rng);
      }()),
      head_part_([&] {
          Rng rng = seeded_rng(cfg.seed + 1);
          return nn::Conv2d(cfg.base_width, cfg.part_count + 1, 1, 1, 0, rng);
      }()),
      head_uv_([&] {
          Rng rng = seeded_rng(cfg.seed + 2);
          return nn::Conv2d(cfg.base_width, 2 * cfg.part_count, 1, 1, 0, rng);
      }()) {}

EgoDPHeads EgoDPNet::forward(const nn::Tensor& image) {
    nn::Tensor f = backbone_.forward(image);
    EgoDPHeads heads;
    heads.part_logits = head_part_.forward(f);
    heads.uv = uv_act_.forward(head_uv_.forward(f));
    return heads;
}

void EgoDPNet::backward(const nn::Tensor& d_part_logits, const nn::Tensor& d_uv) {
    nn::Tensor df = head_part_.backward(d_part_logits);
    nn::Tensor df_uv = head_uv_.backward(uv_act_.backward(d_uv));
    for (size_t i = 0; i < df.v.size(); ++i) df.v[i] += df_uv.v[i];
    backbone_.backward(df);
}

std::vector<nn::ParamBlock> EgoDPNet::params() {
    std::vector<nn::ParamBlock> out;
    backbone_.collect_params("backbone", out);
    head_part_.collect_params("head_part", out);
    head_uv_.collect_params("head_uv", out);
    return out;
}

IUVImage egodp_predict(EgoDPNet& net, const ImageF& image) {
    const auto& cfg = net.config();
    if (image.width != cfg.image_size || image.height != cfg.image_size)
        throw std::invalid_argument("egodp_predict: image size differs from the trained size");
    EgoDPHeads heads = net.forward(tensor_from_image(image));

    const int p1 = cfg.part_count + 1;
    IUVImage out = IUVImage::background(image.width, image.height, cfg.part_count);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            int best = 0;
            float best_v = heads.part_logits.at(0, 0, y, x);
            for (int c = 1; c < p1; ++c) {
                float v = heads.part_logits.at(0, c, y, x);
                if (v > best_v) {
                    best_v = v;
                    best = c;
                }
            }
            if (best == 0) continue;
            size_t i = out.idx(x, y);
            out.part[i] = uint16_t(best);
            out.u[i] = heads.uv.at(0, 2 * (best - 1), y, x);
            out.v[i] = heads.uv.at(0, 2 * (best - 1) + 1, y, x);
            out.depth[i] = 1.0f;
        }
    return out;
}

// ---------------------------------------------------------------------------
// RenderNet

RenderNet::RenderNet(const RenderNetConfig& cfg)
    : cfg_(cfg),
      backbone_([&] {
          Rng rng = seeded_rng(cfg.seed);
          return detail::UNetBackbone(cfg.in_channels, cfg.base_width, 4, rng);
      }()),
      head_([&] {
          Rng rng = seeded_rng(cfg.seed + 1);
          return nn::Conv2d(cfg.base_width, 3, 3, 1, 1, rng);
      }()) {}

nn::Tensor RenderNet::forward(const nn::Tensor& feat) {
    if (feat.c != cfg_.in_channels)
        throw std::invalid_argument("RenderNet: feature channel mismatch");
    nn::Tensor y = tanh_.forward(head_.forward(backbone_.forward(feat)));
    for (auto& v : y.v) v = 0.5f * (v + 1.f);  // tanh -> [0,1]
    return y;
}

nn::Tensor RenderNet::backward(const nn::Tensor& d_image) {
    nn::Tensor d = d_image;
    for (auto& v : d.v) v *= 0.5f;
    return backbone_.backward(head_.backward(tanh_.backward(d)));
}

std::vector<nn::ParamBlock> RenderNet::params() {
    std::vector<nn::ParamBlock> out;
    backbone_.collect_params("backbone", out);
    head_.collect_params("head", out);
    return out;
}

ImageF rendernet_forward(RenderNet& net, const FeatureImage& feat) {
    return image_from_tensor(net.forward(tensor_from_feature(feat)));
}

// ---------------------------------------------------------------------------
// MultiScaleDiscriminator

MultiScaleDiscriminator::MultiScaleDiscriminator(const DiscriminatorConfig& cfg) : cfg_(cfg) {
    cond_channels_ = cfg.in_channels - 3;
    for (int s = 0; s < 3; ++s) {
        Rng rng = seeded_rng(cfg.seed + uint64_t(s));
        auto seq = std::make_unique<nn::Sequential>();
        seq->add(std::make_unique<nn::Conv2d>(cfg.in_channels, 48, 4, 2, 1, rng), "c0");
        seq->add(std::make_unique<nn::LeakyReLU>(0.2f), "a0");
        seq->add(std::make_unique<nn::Conv2d>(48, 96, 4, 2, 1, rng), "c1");
        seq->add(std::make_unique<nn::InstanceNorm>(96), "n1");
        seq->add(std::make_unique<nn::LeakyReLU>(0.2f), "a1");
        seq->add(std::make_unique<nn::Conv2d>(96, 192, 4, 2, 1, rng), "c2");
        seq->add(std::make_unique<nn::InstanceNorm>(192), "n2");
        seq->add(std::make_unique<nn::LeakyReLU>(0.2f), "a2");
        seq->add(std::make_unique<nn::Conv2d>(192, 1, 3, 1, 1, rng), "c3");
        scales_.push_back(std::move(seq));
    }
}

std::array<nn::Tensor, 3> MultiScaleDiscriminator::forward(const nn::Tensor& condition,
                                                           const nn::Tensor& image) {
    nn::Tensor full = nn::concat_channels(condition, image);
    nn::Tensor half = pool1_.forward(full);
    nn::Tensor quarter = pool2_.forward(half);
    return {scales_[0]->forward(full), scales_[1]->forward(half), scales_[2]->forward(quarter)};
}

std::pair<nn::Tensor, nn::Tensor> MultiScaleDiscriminator::backward(
    const std::array<nn::Tensor, 3>& d_logits) {
    nn::Tensor d_quarter = scales_[2]->backward(d_logits[2]);
    nn::Tensor d_half = scales_[1]->backward(d_logits[1]);
    {
        nn::Tensor up = pool2_.backward(d_quarter);
        for (size_t i = 0; i < d_half.v.size(); ++i) d_half.v[i] += up.v[i];
    }
    nn::Tensor d_full = scales_[0]->backward(d_logits[0]);
    {
        nn::Tensor up = pool1_.backward(d_half);
        for (size_t i = 0; i < d_full.v.size(); ++i) d_full.v[i] += up.v[i];
    }
    nn::Tensor d_cond, d_img;
    nn::split_channels(d_full, cond_channels_, d_cond, d_img);
    return {std::move(d_cond), std::move(d_img)};
}

std::vector<nn::ParamBlock> MultiScaleDiscriminator::params() {
    std::vector<nn::ParamBlock> out;
    for (size_t s = 0; s < scales_.size(); ++s)
        scales_[s]->collect_params("scale" + std::to_string(s), out);
    return out;
}

size_t MultiScaleDiscriminator::scale_param_count() const {
    std::vector<nn::ParamBlock> out;
    const_cast<MultiScaleDiscriminator*>(this)->scales_[0]->collect_params("s", out);
    return nn::param_count(out);
}

// ---------------------------------------------------------------------------
// FrameFeatureNet

FrameFeatureNet::FrameFeatureNet(const FrameFeatureNetConfig& cfg)
    : cfg_(cfg),
      backbone_([&] {
          Rng rng = seeded_rng(cfg.seed);
          return detail::UNetBackbone(3, cfg.base_width, 3, rng);
      }()),
      head_([&] {
          Rng rng = seeded_rng(cfg.seed + 1);
          return nn::Conv2d(cfg.base_width, cfg.out_channels, 3, 1, 1, rng);
      }()) {}

nn::Tensor FrameFeatureNet::forward(const nn::Tensor& te_atlas) {
    return head_.forward(backbone_.forward(te_atlas));
}

nn::Tensor FrameFeatureNet::backward(const nn::Tensor& dy) {
    return backbone_.backward(head_.backward(dy));
}

std::vector<nn::ParamBlock> FrameFeatureNet::params() {
    std::vector<nn::ParamBlock> out;
    backbone_.collect_params("backbone", out);
    head_.collect_params("head", out);
    return out;
}

// ---------------------------------------------------------------------------
// RandomConvPyramid

RandomConvPyramid::RandomConvPyramid(uint64_t seed) {
    const int chans[6] = {3, 16, 32, 64, 64, 64};
    Rng rng = seeded_rng(seed);
    for (int i = 0; i < 5; ++i) {
        convs_.emplace_back(chans[i], chans[i + 1], 3, 2, 1, rng);
        acts_.emplace_back(0.2f);
    }
}

std::vector<nn::Tensor> RandomConvPyramid::features(const nn::Tensor& image) {
    std::vector<nn::Tensor> out;
    nn::Tensor cur = image;
    for (size_t i = 0; i < convs_.size(); ++i) {
        cur = acts_[i].forward(convs_[i].forward(cur));
        out.push_back(cur);
    }
    return out;
}

nn::Tensor RandomConvPyramid::backward(const std::vector<nn::Tensor>& feature_grads) {
    if (feature_grads.size() != convs_.size())
        throw std::invalid_argument("RandomConvPyramid: expected one gradient per level");
    nn::Tensor cur;
    for (int i = int(convs_.size()) - 1; i >= 0; --i) {
        nn::Tensor d = feature_grads[i];
        if (cur.size() > 0)
            for (size_t k = 0; k < d.v.size(); ++k) d.v[k] += cur.v[k];
        cur = convs_[i].backward(acts_[i].backward(d));
        // frozen extractor: parameter grads are discarded
        std::fill(convs_[i].grad_w.begin(), convs_[i].grad_w.end(), 0.f);
        std::fill(convs_[i].grad_b.begin(), convs_[i].grad_b.end(), 0.f);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {
constexpr char kCkptMagic[8] = {'E', 'G', 'R', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const std::string& arch_json, int64_t step,
                     const std::vector<nn::ParamBlock>& params) {
    json header;
    header["version"] = 1;
    header["arch"] = json::parse(arch_json.empty() ? "{}" : arch_json);
    header["step"] = step;
    json dir = json::array();
    for (const auto& p : params) dir.push_back({{"name", p.name}, {"count", p.value->size()}});
    header["tensors"] = dir;
    std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingArtifactError("cannot write checkpoint: " + path.string());
    out.write(kCkptMagic, 8);
    uint32_t hlen = uint32_t(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(htext.data(), std::streamsize(htext.size()));
    for (const auto& p : params)
        out.write(reinterpret_cast<const char*>(p.value->data()),
                  std::streamsize(p.value->size() * sizeof(float)));
}

namespace {
json read_checkpoint_header(std::ifstream& in, const std::filesystem::path& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic: " + path.string());
    uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    std::string htext(hlen, '\0');
    in.read(htext.data(), hlen);
    return json::parse(htext);
}
}  // namespace

CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 std::vector<nn::ParamBlock> params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open checkpoint: " + path.string());
    json header = read_checkpoint_header(in, path);
    const auto& dir = header.at("tensors");
    if (dir.size() != params.size())
        throw std::runtime_error("checkpoint: tensor count mismatch: " + path.string());
    for (size_t i = 0; i < params.size(); ++i) {
        if (dir[i].at("name").get<std::string>() != params[i].name ||
            dir[i].at("count").get<size_t>() != params[i].value->size())
            throw std::runtime_error("checkpoint: tensor directory mismatch at " + params[i].name);
        in.read(reinterpret_cast<char*>(params[i].value->data()),
                std::streamsize(params[i].value->size() * sizeof(float)));
        if (!in) throw std::runtime_error("checkpoint: truncated block: " + params[i].name);
    }
    return {header.at("arch").dump(), header.at("step").get<int64_t>()};
}

CheckpointHeader peek_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open checkpoint: " + path.string());
    json header = read_checkpoint_header(in, path);
    return {header.at("arch").dump(), header.at("step").get<int64_t>()};
}

}  // namespace ego
