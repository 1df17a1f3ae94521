#include "evc/evi_net.hpp"

#include <algorithm>
#include <cmath>

#include "evc/engine.hpp"
#include "evc/errors.hpp"
#include "evc/rng.hpp"

namespace evc {

namespace {

void draw_normal(RngStream& rng, double variance, std::span<float> out) {
    const double sd = std::sqrt(variance);
    for (float& v : out) v = static_cast<float>(sd * rng.normal());
}

}  // namespace

int PredictiveDistribution::predicted_class() const {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

BayesianNet::BayesianNet(Architecture arch)
    : arch_(arch), layout_(ParamLayout::of(ModelKind::bayesian, arch)), params_(layout_.total, 0.0f) {
    arch_.validate();
}

BayesianNet::BayesianNet(Architecture arch, std::vector<float> params)
    : arch_(arch), layout_(ParamLayout::of(ModelKind::bayesian, arch)), params_(std::move(params)) {
    arch_.validate();
    if (params_.size() != layout_.total) {
        throw DimensionError("bayesian net needs " + std::to_string(layout_.total) + " parameters, got " +
                             std::to_string(params_.size()));
    }
}

BayesianNet::BayesianNet(const BayesianConvLayer& conv, const GaussianLinear& fc, std::size_t input_size)
    : BayesianNet([&] {
          if (conv.kernels.empty()) throw DimensionError("conv layer has no kernels");
          Architecture a;
          a.kernels = conv.kernels.size();
          a.kernel_size = conv.kernels.front().mu.dim(0);
          a.input_size = input_size;
          a.classes = fc.mu.dim(0);
          return a;
      }()) {
    const std::size_t area = arch_.kernel_area();
    for (std::size_t n = 0; n < arch_.kernels; ++n) {
        const auto& k = conv.kernels[n];
        if (k.mu.size() != area) {
            throw DimensionError("kernel " + std::to_string(n) + " has shape " + shape_string(k.mu.shape()));
        }
        std::copy(k.mu.data().begin(), k.mu.data().end(), kernel_mean(n).begin());
        conv_rho(n) = k.rho;
    }
    if (fc.mu.rank() != 2 || fc.mu.dim(1) != arch_.fc_inputs() || fc.rho.size() != arch_.classes ||
        fc.bias.size() != arch_.classes) {
        throw DimensionError("fc layer " + shape_string(fc.mu.shape()) + " does not match " +
                             std::to_string(arch_.fc_inputs()) + " inputs");
    }
    std::copy(fc.mu.data().begin(), fc.mu.data().end(), params_.begin() + layout_.fc_mu);
    for (std::size_t k = 0; k < arch_.classes; ++k) {
        fc_rho(k) = fc.rho[k];
        fc_bias(k) = fc.bias[k];
    }
}

BayesianNet BayesianNet::initialized(const Architecture& arch, std::uint64_t seed, double init_sigma2) {
    BayesianNet net(arch);
    RngStream rng(seed, stream_id("init"));
    auto p = net.params();
    const auto& L = net.layout();
    draw_normal(rng, 2.0 / arch.kernel_area(), p.subspan(L.conv_mu, L.conv_rho - L.conv_mu));
    draw_normal(rng, 2.0 / arch.fc_inputs(), p.subspan(L.fc_mu, L.fc_rho - L.fc_mu));
    const auto rho = static_cast<float>(softplus_inverse(init_sigma2));
    std::fill(p.begin() + L.conv_rho, p.begin() + L.fc_mu, rho);
    std::fill(p.begin() + L.fc_rho, p.begin() + L.fc_bias, rho);
    return net;
}

std::span<float> BayesianNet::kernel_mean(std::size_t n) {
    return std::span(params_).subspan(layout_.conv_mu + n * arch_.kernel_area(), arch_.kernel_area());
}

std::span<const float> BayesianNet::kernel_mean(std::size_t n) const {
    return std::span(params_).subspan(layout_.conv_mu + n * arch_.kernel_area(), arch_.kernel_area());
}

std::span<float> BayesianNet::fc_mean_row(std::size_t k) {
    return std::span(params_).subspan(layout_.fc_mu + k * arch_.fc_inputs(), arch_.fc_inputs());
}

std::span<const float> BayesianNet::fc_mean_row(std::size_t k) const {
    return std::span(params_).subspan(layout_.fc_mu + k * arch_.fc_inputs(), arch_.fc_inputs());
}

BayesianConvLayer BayesianNet::conv_layer() const {
    BayesianConvLayer layer;
    const std::size_t d = arch_.kernel_size;
    for (std::size_t n = 0; n < arch_.kernels; ++n) {
        auto m = kernel_mean(n);
        layer.kernels.push_back({Tensor({d, d}, std::vector<float>(m.begin(), m.end())), conv_rho(n)});
    }
    return layer;
}

GaussianLinear BayesianNet::fc_layer() const {
    const auto first = params_.begin() + layout_.fc_mu;
    GaussianLinear fc{Tensor({arch_.classes, arch_.fc_inputs()},
                             std::vector<float>(first, first + arch_.classes * arch_.fc_inputs())),
                      {}, {}};
    for (std::size_t k = 0; k < arch_.classes; ++k) {
        fc.rho.push_back(fc_rho(k));
        fc.bias.push_back(fc_bias(k));
    }
    return fc;
}

MomentTensor forward_conv_moments(const Tensor& x, const BayesianConvLayer& layer) {
    if (layer.kernels.empty()) throw DimensionError("forward_conv_moments: layer has no kernels");
    if (x.rank() != 2) throw DimensionError("forward_conv_moments: input must be 2-D, got " + shape_string(x.shape()));
    const Tensor& k0 = layer.kernels.front().mu;
    Tensor x2 = x;
    for (float& v : x2.data()) v *= v;
    const Tensor patch_sq = conv2d_valid(x2, Tensor(k0.shape(), 1.0f));
    const std::size_t oh = patch_sq.dim(0), ow = patch_sq.dim(1), area = oh * ow;
    const std::size_t n = layer.kernels.size();
    MomentTensor out{Tensor({n, oh, ow}), Tensor({n, oh, ow})};
    for (std::size_t c = 0; c < n; ++c) {
        const auto& k = layer.kernels[c];
        if (k.mu.shape() != k0.shape()) {
            throw DimensionError("forward_conv_moments: kernel " + std::to_string(c) + " shape " +
                                 shape_string(k.mu.shape()) + " differs from " + shape_string(k0.shape()));
        }
        const Tensor mean = conv2d_valid(x, k.mu);
        const double s2 = k.sigma2();
        for (std::size_t i = 0; i < area; ++i) {
            out.mean[c * area + i] = mean[i];
            out.var[c * area + i] = static_cast<float>(s2 * patch_sq[i]);
        }
    }
    return out;
}

MomentTensor relu_moments(const MomentTensor& m) {
    if (m.mean.shape() != m.var.shape()) {
        throw DimensionError("relu_moments: mean " + shape_string(m.mean.shape()) + " vs var " +
                             shape_string(m.var.shape()));
    }
    MomentTensor out = m;
    for (std::size_t i = 0; i < m.mean.size(); ++i) {
        const bool on = m.mean[i] > 0.0f;
        out.mean[i] = on ? m.mean[i] : 0.0f;
        out.var[i] = on ? m.var[i] : 0.0f;
    }
    return out;
}

MomentTensor maxpool_moments(const MomentTensor& m) {
    if (m.mean.shape() != m.var.shape() || m.mean.rank() != 3) {
        throw DimensionError("maxpool_moments: expected matching [C x H x W] moments, got " +
                             shape_string(m.mean.shape()) + " and " + shape_string(m.var.shape()));
    }
    const std::size_t c = m.mean.dim(0), h = m.mean.dim(1), w = m.mean.dim(2);
    if (h % 2 || w % 2) throw DimensionError("maxpool_moments: odd spatial dims " + shape_string(m.mean.shape()));
    const std::size_t area = h * w, out_area = area / 4;
    MomentTensor out{Tensor({c, h / 2, w / 2}), Tensor({c, h / 2, w / 2})};
    for (std::size_t ch = 0; ch < c; ++ch) {
        auto first = m.mean.data().begin() + ch * area;
        const auto pooled = max_pool_2x2(Tensor({h, w}, std::vector<float>(first, first + area)));
        for (std::size_t i = 0; i < out_area; ++i) {
            out.mean[ch * out_area + i] = pooled.values[i];
            out.var[ch * out_area + i] = m.var[ch * area + pooled.argmax[i]];
        }
    }
    return out;
}

MomentTensor fc_moments(const MomentTensor& m, const GaussianLinear& fc) {
    const std::size_t f = m.mean.size();
    if (m.var.size() != f || fc.mu.rank() != 2 || fc.mu.dim(1) != f) {
        throw DimensionError("fc_moments: input of " + std::to_string(f) + " features vs weights " +
                             shape_string(fc.mu.shape()));
    }
    const std::size_t rows = fc.mu.dim(0);
    if (fc.rho.size() != rows || fc.bias.size() != rows) {
        throw DimensionError("fc_moments: rho/bias length must equal " + std::to_string(rows));
    }
    double raw2 = 0.0;
    for (std::size_t i = 0; i < f; ++i) raw2 += double(m.mean[i]) * m.mean[i] + m.var[i];
    MomentTensor out{Tensor({rows}), Tensor({rows})};
    for (std::size_t k = 0; k < rows; ++k) {
        double mean = fc.bias[k], var = 0.0;
        for (std::size_t i = 0; i < f; ++i) {
            const double w = fc.mu.at(k, i);
            mean += w * m.mean[i];
            var += w * w * m.var[i];
        }
        var += double(fc.sigma2(k)) * raw2;
        out.mean[k] = static_cast<float>(mean);
        out.var[k] = static_cast<float>(var);
    }
    return out;
}

PredictiveDistribution softmax_moments(const MomentTensor& m) {
    const std::size_t c = m.mean.size();
    if (m.var.size() != c) throw DimensionError("softmax_moments: mean and var sizes differ");
    PredictiveDistribution out;
    out.logit_mean.assign(m.mean.data().begin(), m.mean.data().end());
    out.logit_var.assign(m.var.data().begin(), m.var.data().end());
    out.probs = softmax(m.mean.data());
    out.var.resize(c);
    for (std::size_t i = 0; i < c; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double jac = double(out.probs[i]) * ((i == j ? 1.0 : 0.0) - out.probs[j]);
            acc += jac * jac * m.var[j];
        }
        out.var[i] = static_cast<float>(acc);
    }
    return out;
}

PredictiveDistribution predict(std::span<const float> image, const BayesianNet& net) {
    engine::BayesState<float> s(net.arch());
    engine::bayes_forward<float>(net.arch(), net.params(), image, s);
    return {s.probs, s.prob_var, s.logit_mean, s.logit_var};
}

PredictiveDistribution predict(const Tensor& image, const BayesianNet& net) {
    return predict(image.data(), net);
}

}  // namespace evc
