#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "egorender/image.hpp"
#include "egorender/nn.hpp"
#include "egorender/raster.hpp"

namespace ego {

// --- tensor <-> image conversions -----------------------------------------

nn::Tensor tensor_from_image(const ImageF& img);
ImageF image_from_tensor(const nn::Tensor& t, int sample = 0);
nn::Tensor tensor_from_feature(const FeatureImage& f);
FeatureImage feature_from_tensor(const nn::Tensor& t, int sample = 0);

namespace detail {
// Shared U-Net wiring: enc0 + (levels-1) stride-2 blocks, mirrored decoder
// with skip concats, returning a base-width map at input resolution.
class UNetBackbone {
public:
    UNetBackbone(int in_c, int base, int levels, Rng& rng);
    nn::Tensor forward(const nn::Tensor& x);
    nn::Tensor backward(const nn::Tensor& dy);
    void collect_params(const std::string& prefix, std::vector<nn::ParamBlock>& out);

private:
    int levels_;
    std::vector<std::unique_ptr<nn::Sequential>> enc_, dec_;
    std::vector<nn::Upsample2x> up_;
    std::vector<nn::Tensor> enc_out_;
};
}  // namespace detail

// --- Ego-DPNet --------------------------------------------------------------

struct EgoDPNetConfig {
    int part_count = 10;
    int base_width = 32;
    int image_size = 128;  // input size is fixed in training and testing
    uint64_t seed = 1;
};

struct EgoDPHeads {
    nn::Tensor part_logits;  // (N, P+1, H, W)
    nn::Tensor uv;           // (N, 2P, H, W), sigmoid-bounded
};

class EgoDPNet {
public:
    explicit EgoDPNet(const EgoDPNetConfig& cfg);

    EgoDPHeads forward(const nn::Tensor& image);
    void backward(const nn::Tensor& d_part_logits, const nn::Tensor& d_uv);
    std::vector<nn::ParamBlock> params();
    const EgoDPNetConfig& config() const { return cfg_; }

private:
    EgoDPNetConfig cfg_;
    detail::UNetBackbone backbone_;
    nn::Conv2d head_part_, head_uv_;
    nn::Sigmoid uv_act_;
};

// Inference: argmax part per pixel, UV taken from the argmax part's channel
// pair. The depth channel is a dummy finite value on foreground (these IUVs
// never drive z-tests). Throws if the image size differs from the trained size.
IUVImage egodp_predict(EgoDPNet& net, const ImageF& image);

// --- RenderNet --------------------------------------------------------------

struct RenderNetConfig {
    int in_channels = 6;
    int base_width = 64;
    uint64_t seed = 2;
};

class RenderNet {
public:
    explicit RenderNet(const RenderNetConfig& cfg);

    nn::Tensor forward(const nn::Tensor& feat);  // output in [0,1]
    nn::Tensor backward(const nn::Tensor& d_image);
    std::vector<nn::ParamBlock> params();
    const RenderNetConfig& config() const { return cfg_; }

private:
    RenderNetConfig cfg_;
    detail::UNetBackbone backbone_;
    nn::Conv2d head_;
    nn::Tanh tanh_;
};

ImageF rendernet_forward(RenderNet& net, const FeatureImage& feat);

// --- multiscale discriminator ----------------------------------------------

struct DiscriminatorConfig {
    int in_channels = 9;  // condition channels + 3 image channels
    uint64_t seed = 3;
};

class MultiScaleDiscriminator {
public:
    explicit MultiScaleDiscriminator(const DiscriminatorConfig& cfg);

    // Patch logits at scales 1, 1/2, 1/4 of concat(condition, image).
    std::array<nn::Tensor, 3> forward(const nn::Tensor& condition, const nn::Tensor& image);
    // Gradients w.r.t. (condition, image).
    std::pair<nn::Tensor, nn::Tensor> backward(const std::array<nn::Tensor, 3>& d_logits);
    std::vector<nn::ParamBlock> params();
    size_t scale_param_count() const;

private:
    DiscriminatorConfig cfg_;
    std::vector<std::unique_ptr<nn::Sequential>> scales_;
    nn::AvgPool2x pool1_, pool2_;
    int cond_channels_ = 0;
};

// --- Fea-Net baseline frame feature extractor -------------------------------

struct FrameFeatureNetConfig {
    int out_channels = 16;
    int base_width = 48;
    uint64_t seed = 4;
};

// Texture-space encoder-decoder: T_e atlas (3ch) -> 16-channel texture stack.
class FrameFeatureNet {
public:
    explicit FrameFeatureNet(const FrameFeatureNetConfig& cfg);

    nn::Tensor forward(const nn::Tensor& te_atlas);
    nn::Tensor backward(const nn::Tensor& dy);
    std::vector<nn::ParamBlock> params();

private:
    FrameFeatureNetConfig cfg_;
    detail::UNetBackbone backbone_;
    nn::Conv2d head_;
};

// --- perceptual feature extractors ------------------------------------------

class PerceptualExtractor {
public:
    virtual ~PerceptualExtractor() = default;
    virtual std::vector<nn::Tensor> features(const nn::Tensor& image) = 0;
    // VJP back to the image given one upstream gradient per feature level.
    virtual nn::Tensor backward(const std::vector<nn::Tensor>& feature_grads) = 0;
    virtual std::string name() const = 0;
};

// Fixed seed-deterministic 5-layer random convolutional pyramid. Weights are
// frozen; only input gradients flow.
class RandomConvPyramid : public PerceptualExtractor {
public:
    explicit RandomConvPyramid(uint64_t seed = 5);
    std::vector<nn::Tensor> features(const nn::Tensor& image) override;
    nn::Tensor backward(const std::vector<nn::Tensor>& feature_grads) override;
    std::string name() const override { return "random-pyramid"; }

private:
    std::vector<nn::Conv2d> convs_;
    std::vector<nn::LeakyReLU> acts_;
};

// Single-layer identity extractor: the perceptual loss reduces to plain L1.
class IdentityExtractor : public PerceptualExtractor {
public:
    std::vector<nn::Tensor> features(const nn::Tensor& image) override { return {image}; }
    nn::Tensor backward(const std::vector<nn::Tensor>& feature_grads) override {
        return feature_grads.at(0);
    }
    std::string name() const override { return "identity"; }
};

// --- face embedding hook ------------------------------------------------------

class FaceEmbedder {
public:
    virtual ~FaceEmbedder() = default;
    virtual std::vector<float> embed(const nn::Tensor& crop) = 0;
    virtual nn::Tensor embed_backward(const nn::Tensor& crop,
                                      const std::vector<float>& upstream) = 0;
    virtual std::string name() const = 0;
};

// Raw-pixel embedding; the face loss reduces to L1 of the crops.
class IdentityFaceEmbedder : public FaceEmbedder {
public:
    std::vector<float> embed(const nn::Tensor& crop) override { return crop.v; }
    nn::Tensor embed_backward(const nn::Tensor& crop, const std::vector<float>& upstream) override {
        nn::Tensor g = crop;
        g.v = upstream;
        return g;
    }
    std::string name() const override { return "identity"; }
};

// --- checkpoints --------------------------------------------------------------

// Versioned single-file container: JSON header (architecture config, step
// count, tensor directory) + raw float32 blocks.
void save_checkpoint(const std::filesystem::path& path, const std::string& arch_json, int64_t step,
                     const std::vector<nn::ParamBlock>& params);

struct CheckpointHeader {
    std::string arch_json;
    int64_t step = 0;
};

// Loads blocks into the given params by name; throws on any mismatch.
CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 std::vector<nn::ParamBlock> params);
CheckpointHeader peek_checkpoint(const std::filesystem::path& path);

}  // namespace ego
