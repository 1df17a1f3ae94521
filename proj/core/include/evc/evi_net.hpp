#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evc/model.hpp"
#include "evc/tensor.hpp"

namespace evc {

/// Variational posterior N(mu, sigma2 I) over one d x d convolution kernel.
struct GaussianKernel {
    Tensor mu;
    float rho = 0.0f;

    float sigma2() const { return softplus(rho); }
};

struct BayesianConvLayer {
    std::vector<GaussianKernel> kernels;
};

/// Fully connected layer with one isotropic Gaussian per output row and a
/// deterministic bias.
struct GaussianLinear {
    Tensor mu;               // [classes x inputs]
    std::vector<float> rho;  // one per output row
    std::vector<float> bias;

    float sigma2(std::size_t row) const { return softplus(rho[row]); }
};

/// Mean and diagonal variance of an activation.
struct MomentTensor {
    Tensor mean;
    Tensor var;
};

struct PredictiveDistribution {
    std::vector<float> probs;  // softmax of the logit means
    std::vector<float> var;    // first-order variance of each probability
    std::vector<float> logit_mean;
    std::vector<float> logit_var;

    int predicted_class() const;
};

/// Bayesian eVI CNN. Parameters live in one flat vector laid out as
/// ParamLayout::of(ModelKind::bayesian, arch).
class BayesianNet {
public:
    explicit BayesianNet(Architecture arch);
    BayesianNet(Architecture arch, std::vector<float> params);
    BayesianNet(const BayesianConvLayer& conv, const GaussianLinear& fc, std::size_t input_size = 28);

    /// Means ~ N(0, 2/fan_in) from the "init" stream; every rho set so sigma2 == init_sigma2.
    static BayesianNet initialized(const Architecture& arch, std::uint64_t seed, double init_sigma2 = 0.01);

    const Architecture& arch() const noexcept { return arch_; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<float> params() noexcept { return params_; }
    std::span<const float> params() const noexcept { return params_; }

    std::span<float> kernel_mean(std::size_t n);
    std::span<const float> kernel_mean(std::size_t n) const;
    float& conv_rho(std::size_t n) { return params_[layout_.conv_rho + n]; }
    float conv_rho(std::size_t n) const { return params_[layout_.conv_rho + n]; }
    float kernel_sigma2(std::size_t n) const { return softplus(conv_rho(n)); }

    std::span<float> fc_mean_row(std::size_t k);
    std::span<const float> fc_mean_row(std::size_t k) const;
    float& fc_rho(std::size_t k) { return params_[layout_.fc_rho + k]; }
    float fc_rho(std::size_t k) const { return params_[layout_.fc_rho + k]; }
    float fc_sigma2(std::size_t k) const { return softplus(fc_rho(k)); }
    float& fc_bias(std::size_t k) { return params_[layout_.fc_bias + k]; }
    float fc_bias(std::size_t k) const { return params_[layout_.fc_bias + k]; }

    BayesianConvLayer conv_layer() const;
    GaussianLinear fc_layer() const;

private:
    Architecture arch_;
    ParamLayout layout_;
    std::vector<float> params_;
};

/// Exact moments of a valid convolution of a deterministic input with
/// Gaussian kernels: mean = x * mu_n, var = sigma2_n * (sum of x^2 over the patch).
MomentTensor forward_conv_moments(const Tensor& x, const BayesianConvLayer& layer);

/// First-order ReLU: mean' = max(mean, 0), var' = var where mean > 0, else 0.
MomentTensor relu_moments(const MomentTensor& m);

/// Routes each 2x2 window through the argmax of its mean channel.
/// Input is [channels x H x W] with even H and W.
MomentTensor maxpool_moments(const MomentTensor& m);

/// Moments of W x + b for independent Gaussian rows of W and an uncertain
/// input with diagonal variance (cross-output covariance dropped).
MomentTensor fc_moments(const MomentTensor& m, const GaussianLinear& fc);

/// First-order (Jacobian) propagation of logit variance through softmax.
PredictiveDistribution softmax_moments(const MomentTensor& m);

/// Deterministic moment forward pass for a single image of the net's input size.
PredictiveDistribution predict(std::span<const float> image, const BayesianNet& net);
PredictiveDistribution predict(const Tensor& image, const BayesianNet& net);

}  // namespace evc
