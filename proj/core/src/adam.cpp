#include "evc/adam.hpp"

#include <cmath>
#include <string>

#include "evc/errors.hpp"

namespace evc {

void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, const AdamConfig& cfg) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw DimensionError("adam_step: params " + std::to_string(params.size()) + ", grads " +
                             std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()) + "/" +
                             std::to_string(state.v.size()));
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const float b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
    const float a1 = static_cast<float>(1.0 - cfg.beta1), a2 = static_cast<float>(1.0 - cfg.beta2);
    // Bias corrections folded into the step size and epsilon.
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    const float step = static_cast<float>(cfg.lr * std::sqrt(c2) / c1);
    const float eps = static_cast<float>(cfg.eps * std::sqrt(c2));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const float g = grads[i];
        state.m[i] = b1 * state.m[i] + a1 * g;
        state.v[i] = b2 * state.v[i] + a2 * g * g;
        params[i] -= step * state.m[i] / (std::sqrt(state.v[i]) + eps);
    }
}

}  // namespace evc
