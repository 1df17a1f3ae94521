#include "evc/elbo.hpp"

#include <algorithm>

namespace evc {

double total_kl(const BayesianNet& net, const PriorSpec& prior) {
    return total_kl<float>(net.arch(), net.params(), prior);
}

double expected_nll(const PredictiveDistribution& pred, int label, double eps) {
    std::vector<double> p(pred.probs.begin(), pred.probs.end());
    std::vector<double> v(pred.var.begin(), pred.var.end());
    return engine::gaussian_nll<double>(p, v, label, eps);
}

template <typename T>
ElboValue evaluate_elbo(const Architecture& arch, std::span<const T> params, const Batch& batch,
                        const PriorSpec& prior, double kl_weight, engine::BayesState<T>& state,
                        std::span<T> grad) {
    if (batch.size() == 0) throw DomainError("elbo: empty batch");
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), T(0));
    const T eps = static_cast<T>(engine::kNllEpsilon);
    const T scale = T(1) / static_cast<T>(batch.size());
    double nll = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        engine::bayes_forward<T>(arch, params, batch.images[i], state);
        if (want_grad) {
            nll += engine::bayes_backward<T>(arch, params, batch.labels[i], eps, scale, state, grad);
        } else {
            nll += engine::gaussian_nll<T>(state.probs, state.prob_var, batch.labels[i], eps);
        }
    }
    ElboValue v;
    v.nll = nll / static_cast<double>(batch.size());
    v.kl = total_kl<T>(arch, params, prior);
    v.kl_weight = kl_weight;
    v.total = kl_weight * v.kl + v.nll;

    if (want_grad && kl_weight != 0.0) {
        // d KL / d mu = mu / s2;  d KL / d sigma2 = m/2 (1/s2 - 1/sigma2).
        const auto L = ParamLayout::of(ModelKind::bayesian, arch);
        const double s2 = prior.variance;
        auto block = [&](std::size_t mu_off, std::size_t m, std::size_t rho_off) {
            for (std::size_t i = 0; i < m; ++i) {
                grad[mu_off + i] += static_cast<T>(kl_weight * params[mu_off + i] / s2);
            }
            const double rho = params[rho_off];
            const double sigma2 = softplus(rho);
            grad[rho_off] += static_cast<T>(kl_weight * 0.5 * m * (1.0 / s2 - 1.0 / sigma2) * sigmoid(rho));
        };
        for (std::size_t n = 0; n < arch.kernels; ++n) {
            block(L.conv_mu + n * arch.kernel_area(), arch.kernel_area(), L.conv_rho + n);
        }
        for (std::size_t k = 0; k < arch.classes; ++k) {
            block(L.fc_mu + k * arch.fc_inputs(), arch.fc_inputs(), L.fc_rho + k);
        }
    }
    return v;
}

template <typename T>
double evaluate_cross_entropy(const Architecture& arch, std::span<const T> params, const Batch& batch,
                              engine::VanillaState<T>& state, std::span<T> grad) {
    if (batch.size() == 0) throw DomainError("cross entropy: empty batch");
    const bool want_grad = !grad.empty();
    if (want_grad) std::fill(grad.begin(), grad.end(), T(0));
    const T scale = T(1) / static_cast<T>(batch.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        engine::vanilla_forward<T>(arch, params, batch.images[i], state);
        if (want_grad) {
            loss += engine::vanilla_backward<T>(arch, params, batch.labels[i], scale, state, grad);
        } else {
            const T p = state.probs[static_cast<std::size_t>(batch.labels[i])];
            loss += -std::log(std::max(p, std::numeric_limits<T>::min()));
        }
    }
    return loss / static_cast<double>(batch.size());
}

ElboValue elbo_loss(const BayesianNet& net, const Batch& batch, const PriorSpec& prior, double kl_weight) {
    engine::BayesState<float> state(net.arch());
    return evaluate_elbo<float>(net.arch(), net.params(), batch, prior, kl_weight, state);
}

ElboGradient grad_elbo(const BayesianNet& net, const Batch& batch, const PriorSpec& prior, double kl_weight) {
    engine::BayesState<float> state(net.arch());
    ElboGradient g;
    g.grad.resize(net.params().size());
    g.value = evaluate_elbo<float>(net.arch(), net.params(), batch, prior, kl_weight, state, g.grad);
    return g;
}

double cross_entropy_loss(const VanillaNet& net, const Batch& batch) {
    engine::VanillaState<float> state(net.arch());
    return evaluate_cross_entropy<float>(net.arch(), net.params(), batch, state);
}

CrossEntropyGradient grad_cross_entropy(const VanillaNet& net, const Batch& batch) {
    engine::VanillaState<float> state(net.arch());
    CrossEntropyGradient g;
    g.grad.resize(net.params().size());
    g.loss = evaluate_cross_entropy<float>(net.arch(), net.params(), batch, state, std::span<float>(g.grad));
    return g;
}

template ElboValue evaluate_elbo<float>(const Architecture&, std::span<const float>, const Batch&, const PriorSpec&,
                                        double, engine::BayesState<float>&, std::span<float>);
template ElboValue evaluate_elbo<double>(const Architecture&, std::span<const double>, const Batch&,
                                         const PriorSpec&, double, engine::BayesState<double>&,
                                         std::span<double>);
template double evaluate_cross_entropy<float>(const Architecture&, std::span<const float>, const Batch&,
                                              engine::VanillaState<float>&, std::span<float>);
template double evaluate_cross_entropy<double>(const Architecture&, std::span<const double>, const Batch&,
                                               engine::VanillaState<double>&, std::span<double>);

}  // namespace evc
