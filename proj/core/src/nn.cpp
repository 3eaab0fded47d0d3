#include "egorender/nn.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ego::nn {

using RMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RMat>;
using MapRMc = Eigen::Map<const RMat>;

bool Tensor::all_finite() const {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n != b.n || a.h != b.h || a.w != b.w)
        throw std::invalid_argument("concat_channels: spatial/batch mismatch");
    Tensor out(a.n, a.c + b.c, a.h, a.w);
    const size_t hw = size_t(a.h) * a.w;
    for (int s = 0; s < a.n; ++s) {
        std::copy_n(&a.v[size_t(s) * a.c * hw], size_t(a.c) * hw, &out.v[size_t(s) * out.c * hw]);
        std::copy_n(&b.v[size_t(s) * b.c * hw], size_t(b.c) * hw,
                    &out.v[size_t(s) * out.c * hw + size_t(a.c) * hw]);
    }
    return out;
}

void split_channels(const Tensor& d, int c_first, Tensor& a, Tensor& b) {
    a = Tensor(d.n, c_first, d.h, d.w);
    b = Tensor(d.n, d.c - c_first, d.h, d.w);
    const size_t hw = size_t(d.h) * d.w;
    for (int s = 0; s < d.n; ++s) {
        std::copy_n(&d.v[size_t(s) * d.c * hw], size_t(c_first) * hw, &a.v[size_t(s) * a.c * hw]);
        std::copy_n(&d.v[size_t(s) * d.c * hw + size_t(c_first) * hw], size_t(b.c) * hw,
                    &b.v[size_t(s) * b.c * hw]);
    }
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_c_, int out_c_, int k_, int stride_, int pad_, Rng& rng)
    : in_c(in_c_), out_c(out_c_), k(k_), stride(stride_), pad(pad_) {
    weight.resize(size_t(out_c) * in_c * k * k);
    bias.assign(out_c, 0.f);
    grad_w.assign(weight.size(), 0.f);
    grad_b.assign(bias.size(), 0.f);
    const float stddev = std::sqrt(2.0f / (float(in_c) * k * k));
    for (auto& w : weight) w = stddev * rng.normalf();
}

void Conv2d::im2col(const Tensor& x, int sample, std::vector<float>& col, int oh, int ow) const {
    const size_t ohw = size_t(oh) * ow;
    col.assign(size_t(in_c) * k * k * ohw, 0.f);
    for (int ic = 0; ic < in_c; ++ic) {
        const float* src = &x.v[((size_t(sample) * x.c + ic) * x.h) * x.w];
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                float* dst = &col[((size_t(ic) * k + ky) * k + kx) * ohw];
                for (int oy = 0; oy < oh; ++oy) {
                    int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= x.h) continue;
                    const float* row = src + size_t(iy) * x.w;
                    float* drow = dst + size_t(oy) * ow;
                    int ox0 = 0, ox1 = ow;
                    // ix = ox*stride - pad + kx must stay inside [0, w)
                    while (ox0 < ow && ox0 * stride - pad + kx < 0) ++ox0;
                    while (ox1 > ox0 && (ox1 - 1) * stride - pad + kx >= x.w) --ox1;
                    if (stride == 1) {
                        std::copy_n(row + (ox0 - pad + kx), ox1 - ox0, drow + ox0);
                    } else {
                        for (int ox = ox0; ox < ox1; ++ox) drow[ox] = row[ox * stride - pad + kx];
                    }
                }
            }
    }
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != in_c) throw std::invalid_argument("Conv2d: input channel mismatch");
    cached_x_ = x;
    const int oh = (x.h + 2 * pad - k) / stride + 1;
    const int ow = (x.w + 2 * pad - k) / stride + 1;
    const size_t ohw = size_t(oh) * ow;
    Tensor y(x.n, out_c, oh, ow);

    std::vector<float> col;
    MapRMc wmat(weight.data(), out_c, size_t(in_c) * k * k);
    for (int s = 0; s < x.n; ++s) {
        im2col(x, s, col, oh, ow);
        MapRMc cmat(col.data(), size_t(in_c) * k * k, ohw);
        MapRM ymat(&y.v[size_t(s) * out_c * ohw], out_c, ohw);
        ymat.noalias() = wmat * cmat;
        for (int oc = 0; oc < out_c; ++oc) ymat.row(oc).array() += bias[oc];
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const Tensor& x = cached_x_;
    const int oh = dy.h, ow = dy.w;
    const size_t ohw = size_t(oh) * ow;
    Tensor dx(x.n, x.c, x.h, x.w);

    std::vector<float> col, dcol(size_t(in_c) * k * k * ohw);
    MapRMc wmat(weight.data(), out_c, size_t(in_c) * k * k);
    MapRM gw(grad_w.data(), out_c, size_t(in_c) * k * k);
    for (int s = 0; s < x.n; ++s) {
        MapRMc dymat(&dy.v[size_t(s) * out_c * ohw], out_c, ohw);
        im2col(x, s, col, oh, ow);
        MapRMc cmat(col.data(), size_t(in_c) * k * k, ohw);
        gw.noalias() += dymat * cmat.transpose();
        for (int oc = 0; oc < out_c; ++oc) grad_b[oc] += dymat.row(oc).sum();

        MapRM dcmat(dcol.data(), size_t(in_c) * k * k, ohw);
        dcmat.noalias() = wmat.transpose() * dymat;
        // col2im scatter-add
        for (int ic = 0; ic < in_c; ++ic) {
            float* dst = &dx.v[((size_t(s) * x.c + ic) * x.h) * x.w];
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const float* src = &dcol[((size_t(ic) * k + ky) * k + kx) * ohw];
                    for (int oy = 0; oy < oh; ++oy) {
                        int iy = oy * stride - pad + ky;
                        if (iy < 0 || iy >= x.h) continue;
                        float* row = dst + size_t(iy) * x.w;
                        const float* srow = src + size_t(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) {
                            int ix = ox * stride - pad + kx;
                            if (ix < 0 || ix >= x.w) continue;
                            row[ix] += srow[ox];
                        }
                    }
                }
        }
    }
    return dx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
    out.push_back({prefix + ".w", &weight, &grad_w});
    out.push_back({prefix + ".b", &bias, &grad_b});
}

// ---------------------------------------------------------------------------
// InstanceNorm

InstanceNorm::InstanceNorm(int channels_) : channels(channels_) {
    gamma.assign(channels, 1.f);
    beta.assign(channels, 0.f);
    grad_gamma.assign(channels, 0.f);
    grad_beta.assign(channels, 0.f);
}

Tensor InstanceNorm::forward(const Tensor& x) {
    constexpr float kEps = 1e-5f;
    Tensor y(x.n, x.c, x.h, x.w);
    cached_xhat_ = Tensor(x.n, x.c, x.h, x.w);
    inv_std_.assign(size_t(x.n) * x.c, 0.f);
    const int hw = x.spatial();
    for (int s = 0; s < x.n; ++s)
        for (int ic = 0; ic < x.c; ++ic) {
            const float* src = &x.v[(size_t(s) * x.c + ic) * hw];
            double mean = 0;
            for (int i = 0; i < hw; ++i) mean += src[i];
            mean /= hw;
            double var = 0;
            for (int i = 0; i < hw; ++i) var += (src[i] - mean) * (src[i] - mean);
            var /= hw;
            float istd = float(1.0 / std::sqrt(var + kEps));
            inv_std_[size_t(s) * x.c + ic] = istd;
            float* xh = &cached_xhat_.v[(size_t(s) * x.c + ic) * hw];
            float* dst = &y.v[(size_t(s) * x.c + ic) * hw];
            const float g = gamma[ic], b = beta[ic], mu = float(mean);
            for (int i = 0; i < hw; ++i) {
                xh[i] = (src[i] - mu) * istd;
                dst[i] = g * xh[i] + b;
            }
        }
    return y;
}

Tensor InstanceNorm::backward(const Tensor& dy) {
    const Tensor& xh = cached_xhat_;
    Tensor dx(dy.n, dy.c, dy.h, dy.w);
    const int hw = dy.spatial();
    for (int s = 0; s < dy.n; ++s)
        for (int ic = 0; ic < dy.c; ++ic) {
            const float* dyp = &dy.v[(size_t(s) * dy.c + ic) * hw];
            const float* xhp = &xh.v[(size_t(s) * dy.c + ic) * hw];
            float* dxp = &dx.v[(size_t(s) * dy.c + ic) * hw];
            double sum_dy = 0, sum_dy_xh = 0;
            for (int i = 0; i < hw; ++i) {
                sum_dy += dyp[i];
                sum_dy_xh += double(dyp[i]) * xhp[i];
            }
            grad_beta[ic] += float(sum_dy);
            grad_gamma[ic] += float(sum_dy_xh);
            const float g = gamma[ic];
            const float istd = inv_std_[size_t(s) * dy.c + ic];
            const float mean_dy = float(sum_dy / hw), mean_dy_xh = float(sum_dy_xh / hw);
            for (int i = 0; i < hw; ++i)
                dxp[i] = g * istd * (dyp[i] - mean_dy - xhp[i] * mean_dy_xh);
        }
    return dx;
}

void InstanceNorm::collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
    out.push_back({prefix + ".gamma", &gamma, &grad_gamma});
    out.push_back({prefix + ".beta", &beta, &grad_beta});
}

// ---------------------------------------------------------------------------
// activations / resampling

Tensor LeakyReLU::forward(const Tensor& x) {
    cached_x_ = x;
    Tensor y = x;
    for (auto& v : y.v)
        if (v < 0) v *= slope_;
    return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.v.size(); ++i)
        if (cached_x_.v[i] < 0) dx.v[i] *= slope_;
    return dx;
}

Tensor Tanh::forward(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.v) v = std::tanh(v);
    cached_y_ = y;
    return y;
}

Tensor Tanh::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= 1.f - cached_y_.v[i] * cached_y_.v[i];
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.v) v = 1.f / (1.f + std::exp(-v));
    cached_y_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.v.size(); ++i)
        dx.v[i] *= cached_y_.v[i] * (1.f - cached_y_.v[i]);
    return dx;
}

Tensor Upsample2x::forward(const Tensor& x) {
    Tensor y(x.n, x.c, x.h * 2, x.w * 2);
    for (int s = 0; s < x.n; ++s)
        for (int ic = 0; ic < x.c; ++ic)
            for (int iy = 0; iy < x.h; ++iy) {
                const float* row = &x.v[((size_t(s) * x.c + ic) * x.h + iy) * x.w];
                float* out0 = &y.v[((size_t(s) * y.c + ic) * y.h + 2 * iy) * y.w];
                float* out1 = out0 + y.w;
                for (int ix = 0; ix < x.w; ++ix) {
                    out0[2 * ix] = out0[2 * ix + 1] = row[ix];
                    out1[2 * ix] = out1[2 * ix + 1] = row[ix];
                }
            }
    return y;
}

Tensor Upsample2x::backward(const Tensor& dy) {
    Tensor dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (int s = 0; s < dy.n; ++s)
        for (int ic = 0; ic < dy.c; ++ic)
            for (int iy = 0; iy < dx.h; ++iy) {
                const float* in0 = &dy.v[((size_t(s) * dy.c + ic) * dy.h + 2 * iy) * dy.w];
                const float* in1 = in0 + dy.w;
                float* row = &dx.v[((size_t(s) * dx.c + ic) * dx.h + iy) * dx.w];
                for (int ix = 0; ix < dx.w; ++ix)
                    row[ix] = in0[2 * ix] + in0[2 * ix + 1] + in1[2 * ix] + in1[2 * ix + 1];
            }
    return dx;
}

Tensor AvgPool2x::forward(const Tensor& x) {
    Tensor y(x.n, x.c, x.h / 2, x.w / 2);
    for (int s = 0; s < x.n; ++s)
        for (int ic = 0; ic < x.c; ++ic)
            for (int iy = 0; iy < y.h; ++iy) {
                const float* in0 = &x.v[((size_t(s) * x.c + ic) * x.h + 2 * iy) * x.w];
                const float* in1 = in0 + x.w;
                float* row = &y.v[((size_t(s) * y.c + ic) * y.h + iy) * y.w];
                for (int ix = 0; ix < y.w; ++ix)
                    row[ix] = 0.25f * (in0[2 * ix] + in0[2 * ix + 1] + in1[2 * ix] + in1[2 * ix + 1]);
            }
    return y;
}

Tensor AvgPool2x::backward(const Tensor& dy) {
    Tensor dx(dy.n, dy.c, dy.h * 2, dy.w * 2);
    for (int s = 0; s < dy.n; ++s)
        for (int ic = 0; ic < dy.c; ++ic)
            for (int iy = 0; iy < dy.h; ++iy) {
                const float* row = &dy.v[((size_t(s) * dy.c + ic) * dy.h + iy) * dy.w];
                float* out0 = &dx.v[((size_t(s) * dx.c + ic) * dx.h + 2 * iy) * dx.w];
                float* out1 = out0 + dx.w;
                for (int ix = 0; ix < dy.w; ++ix) {
                    float v = 0.25f * row[ix];
                    out0[2 * ix] = out0[2 * ix + 1] = v;
                    out1[2 * ix] = out1[2 * ix + 1] = v;
                }
            }
    return dx;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::forward(const Tensor& x) {
    Tensor cur = x;
    for (auto& l : layers_) cur = l->forward(cur);
    return cur;
}

Tensor Sequential::backward(const Tensor& dy) {
    Tensor cur = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

void Sequential::collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
    for (size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params(prefix + "." + names_[i], out);
}

std::unique_ptr<Sequential> conv_block(int in_c, int out_c, int k, int stride, Rng& rng, bool norm,
                                       float slope) {
    auto seq = std::make_unique<Sequential>();
    seq->add(std::make_unique<Conv2d>(in_c, out_c, k, stride, k / 2, rng), "conv");
    if (norm) seq->add(std::make_unique<InstanceNorm>(out_c), "norm");
    seq->add(std::make_unique<LeakyReLU>(slope), "act");
    return seq;
}

size_t param_count(const std::vector<ParamBlock>& params) {
    size_t n = 0;
    for (const auto& p : params) n += p.value->size();
    return n;
}

void zero_grads(std::vector<ParamBlock>& params) {
    for (auto& p : params) std::fill(p.grad->begin(), p.grad->end(), 0.f);
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<ParamBlock> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.emplace_back(p.value->size(), 0.f);
        v_.emplace_back(p.value->size(), 0.f);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, double(t_));
    const double bc2 = 1.0 - std::pow(beta2_, double(t_));
    const float alpha = float(lr_ * std::sqrt(bc2) / bc1);
    for (size_t p = 0; p < params_.size(); ++p) {
        auto& val = *params_[p].value;
        auto& grad = *params_[p].grad;
        auto& m = m_[p];
        auto& v = v_[p];
        const float b1 = float(beta1_), b2 = float(beta2_), e = float(eps_);
        for (size_t i = 0; i < val.size(); ++i) {
            m[i] = b1 * m[i] + (1.f - b1) * grad[i];
            v[i] = b2 * v[i] + (1.f - b2) * grad[i] * grad[i];
            val[i] -= alpha * m[i] / (std::sqrt(v[i]) + e);
        }
        std::fill(grad.begin(), grad.end(), 0.f);
    }
}

}  // namespace ego::nn
