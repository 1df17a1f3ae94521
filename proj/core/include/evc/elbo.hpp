#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "evc/dataset.hpp"
#include "evc/engine.hpp"
#include "evc/errors.hpp"
#include "evc/evi_net.hpp"
#include "evc/vanilla_net.hpp"

namespace evc {

/// Zero-mean isotropic Gaussian prior N(0, variance I) over every weight block.
struct PriorSpec {
    double variance = 1.0;
};

struct ElboValue {
    double kl = 0.0;   // unweighted KL(q || p) of the whole net
    double nll = 0.0;  // batch-mean expected negative log-likelihood
    double kl_weight = 0.0;
    double total = 0.0;  // kl_weight * kl + nll
};

/// KL( N(mu, sigma2 I_m) || N(0, s2 I_m) ) with m = mu.size().
template <typename T>
double kl_isotropic(std::span<const T> mu, double sigma2, const PriorSpec& prior) {
    if (!(sigma2 > 0.0) || !(prior.variance > 0.0)) {
        throw DomainError("kl_isotropic: variances must be positive (sigma2=" + std::to_string(sigma2) +
                          ", prior=" + std::to_string(prior.variance) + ")");
    }
    const double m = static_cast<double>(mu.size()), s2 = prior.variance;
    double sq = 0.0;
    for (T v : mu) sq += static_cast<double>(v) * static_cast<double>(v);
    return 0.5 * (m * sigma2 / s2 + sq / s2 - m + m * std::log(s2 / sigma2));
}

/// Sum of per-kernel (m = d^2) and per-FC-row (m = F) KL terms over a flat
/// Bayesian parameter vector.
template <typename T>
double total_kl(const Architecture& arch, std::span<const T> params, const PriorSpec& prior) {
    const auto L = ParamLayout::of(ModelKind::bayesian, arch);
    const std::size_t area = arch.kernel_area(), f = arch.fc_inputs();
    double kl = 0.0;
    for (std::size_t n = 0; n < arch.kernels; ++n) {
        kl += kl_isotropic(params.subspan(L.conv_mu + n * area, area),
                           static_cast<double>(softplus(params[L.conv_rho + n])), prior);
    }
    for (std::size_t k = 0; k < arch.classes; ++k) {
        kl += kl_isotropic(params.subspan(L.fc_mu + k * f, f),
                           static_cast<double>(softplus(params[L.fc_rho + k])), prior);
    }
    return kl;
}

double total_kl(const BayesianNet& net, const PriorSpec& prior);

/// Gaussian predictive likelihood of the one-hot label:
/// 0.5 * sum_c [ (y_c - p_c)^2 / (v_c + eps) + ln(v_c + eps) ].
double expected_nll(const PredictiveDistribution& pred, int label, double eps = engine::kNllEpsilon);

/// kl_weight * total_kl + mean expected_nll over the batch.
ElboValue elbo_loss(const BayesianNet& net, const Batch& batch, const PriorSpec& prior, double kl_weight);

struct ElboGradient {
    ElboValue value;
    std::vector<float> grad;  // aligned with net.params()
};

ElboGradient grad_elbo(const BayesianNet& net, const Batch& batch, const PriorSpec& prior, double kl_weight);

/// Loss (and optionally its gradient, when grad is non-empty) over a flat
/// parameter vector of either precision. grad is overwritten.
template <typename T>
ElboValue evaluate_elbo(const Architecture& arch, std::span<const T> params, const Batch& batch,
                        const PriorSpec& prior, double kl_weight, engine::BayesState<T>& state,
                        std::span<T> grad = {});

/// Batch-mean cross-entropy (-ln p_label) of the vanilla model, with optional gradient.
template <typename T>
double evaluate_cross_entropy(const Architecture& arch, std::span<const T> params, const Batch& batch,
                              engine::VanillaState<T>& state, std::span<T> grad = {});

struct CrossEntropyGradient {
    double loss = 0.0;
    std::vector<float> grad;
};

double cross_entropy_loss(const VanillaNet& net, const Batch& batch);
CrossEntropyGradient grad_cross_entropy(const VanillaNet& net, const Batch& batch);

}  // namespace evc
