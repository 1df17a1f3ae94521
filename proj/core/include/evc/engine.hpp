#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evc/model.hpp"

// Fused per-sample forward/backward passes over flat parameter vectors.
// Instantiated for float (training) and double (finite-difference shadow
// evaluation). Pooling routes and ReLU gates recorded by the forward pass are
// held fixed by the backward pass.
namespace evc::engine {

inline constexpr double kNllEpsilon = 1e-6;

template <typename T>
struct BayesState {
    explicit BayesState(const Architecture& arch);

    std::vector<T> x;
    std::vector<T> patch_sq;   // sum of x^2 under each conv window
    std::vector<T> conv_mean;  // [N x co x co], pre-ReLU
    std::vector<std::uint32_t> route;  // chosen conv position per pooled cell
    std::vector<std::uint8_t> gate;    // conv mean at the route was > 0
    std::vector<T> h;  // pooled mean, [N x pooled x pooled] flattened
    std::vector<T> q;  // pooled variance
    std::vector<T> logit_mean, logit_var, probs, prob_var;
    std::vector<T> grad_h, grad_q;
};

template <typename T>
void bayes_forward(const Architecture& arch, std::span<const T> params, std::span<const float> image,
                   BayesState<T>& s);

/// 0.5 * sum_c [ (y_c - p_c)^2 / (v_c + eps) + ln(v_c + eps) ] for one-hot y.
template <typename T>
T gaussian_nll(std::span<const T> probs, std::span<const T> prob_var, int label, T eps);

/// Adds scale * d(nll)/d(params) to grad for the state left by bayes_forward.
/// Returns the sample's nll.
template <typename T>
T bayes_backward(const Architecture& arch, std::span<const T> params, int label, T eps, T scale,
                 BayesState<T>& s, std::span<T> grad);

template <typename T>
struct VanillaState {
    explicit VanillaState(const Architecture& arch);

    std::vector<T> x;
    std::vector<T> conv;
    std::vector<std::uint32_t> route;
    std::vector<std::uint8_t> gate;
    std::vector<T> h;
    std::vector<T> logits, probs;
    std::vector<T> grad_h;
};

template <typename T>
void vanilla_forward(const Architecture& arch, std::span<const T> params, std::span<const float> image,
                     VanillaState<T>& s);

/// Adds scale * d(-ln p_label)/d(params) to grad; returns the sample's cross-entropy.
template <typename T>
T vanilla_backward(const Architecture& arch, std::span<const T> params, int label, T scale,
                   VanillaState<T>& s, std::span<T> grad);

}  // namespace evc::engine
