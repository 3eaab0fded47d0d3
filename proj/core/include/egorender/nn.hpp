#pragma once

#include <memory>
#include <string>
#include <vector>

#include "egorender/rng.hpp"

namespace ego::nn {

// Dense NCHW float tensor.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<float> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(size_t(n_) * c_ * h_ * w_, 0.f) {}

    size_t size() const { return v.size(); }
    int spatial() const { return h * w; }
    float& at(int in, int ic, int iy, int ix) {
        return v[((size_t(in) * c + ic) * h + iy) * w + ix];
    }
    float at(int in, int ic, int iy, int ix) const {
        return v[((size_t(in) * c + ic) * h + iy) * w + ix];
    }
    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    bool all_finite() const;
};

Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& d, int c_first, Tensor& a, Tensor& b);

struct ParamBlock {
    std::string name;
    std::vector<float>* value = nullptr;
    std::vector<float>* grad = nullptr;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;
    // Returns dL/dx; accumulates parameter gradients.
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
        (void)prefix;
        (void)out;
    }
};

class Conv2d : public Layer {
public:
    Conv2d(int in_c, int out_c, int k, int stride, int pad, Rng& rng);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) override;

    int in_c, out_c, k, stride, pad;
    std::vector<float> weight, bias;      // weight: (out_c, in_c*k*k) row-major
    std::vector<float> grad_w, grad_b;

private:
    Tensor cached_x_;
    void im2col(const Tensor& x, int sample, std::vector<float>& col, int oh, int ow) const;
};

class InstanceNorm : public Layer {
public:
    explicit InstanceNorm(int channels);
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) override;

    int channels;
    std::vector<float> gamma, beta;
    std::vector<float> grad_gamma, grad_beta;

private:
    Tensor cached_xhat_;
    std::vector<float> inv_std_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(float slope = 0.2f) : slope_(slope) {}
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    float slope_;
    Tensor cached_x_;
};

class Tanh : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor cached_y_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;

private:
    Tensor cached_y_;
};

class Upsample2x : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
};

class AvgPool2x : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
};

class Sequential : public Layer {
public:
    Sequential() = default;
    void add(std::unique_ptr<Layer> layer, const std::string& name) {
        layers_.push_back(std::move(layer));
        names_.push_back(name);
    }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out) override;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<std::string> names_;
};

// Conv + InstanceNorm + LeakyReLU, the standard block of the nets here.
std::unique_ptr<Sequential> conv_block(int in_c, int out_c, int k, int stride, Rng& rng,
                                       bool norm = true, float slope = 0.2f);

size_t param_count(const std::vector<ParamBlock>& params);
void zero_grads(std::vector<ParamBlock>& params);

// Adaptive-moment optimizer.
class Adam {
public:
    Adam(std::vector<ParamBlock> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
         double eps = 1e-8);
    void step();       // applies accumulated grads, then zeroes them
    void set_lr(double lr) { lr_ = lr; }
    int64_t steps() const { return t_; }

private:
    std::vector<ParamBlock> params_;
    std::vector<std::vector<float>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

}  // namespace ego::nn
