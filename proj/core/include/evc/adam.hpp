#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace evc {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<float> m;
    std::vector<float> v;
    std::uint64_t step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0f), v(n, 0.0f) {}
};

/// One bias-corrected Adam update in place.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace evc
