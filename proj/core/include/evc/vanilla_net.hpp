#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evc/model.hpp"
#include "evc/tensor.hpp"

namespace evc {

class BayesianNet;

/// Deterministic baseline with the same conv/pool/FC shapes as BayesianNet,
/// laid out as ParamLayout::of(ModelKind::vanilla, arch).
class VanillaNet {
public:
    explicit VanillaNet(Architecture arch);
    VanillaNet(Architecture arch, std::vector<float> params);

    /// Same draws as BayesianNet::initialized for the same seed.
    static VanillaNet initialized(const Architecture& arch, std::uint64_t seed);
    /// Copies the posterior means of a Bayesian net.
    static VanillaNet from_means(const BayesianNet& net);

    const Architecture& arch() const noexcept { return arch_; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::span<float> params() noexcept { return params_; }
    std::span<const float> params() const noexcept { return params_; }

    std::span<float> kernel(std::size_t n);
    std::span<const float> kernel(std::size_t n) const;
    std::span<float> fc_row(std::size_t k);
    std::span<const float> fc_row(std::size_t k) const;
    float& fc_bias(std::size_t k) { return params_[layout_.fc_bias + k]; }
    float fc_bias(std::size_t k) const { return params_[layout_.fc_bias + k]; }

private:
    Architecture arch_;
    ParamLayout layout_;
    std::vector<float> params_;
};

/// softmax(fc(pool(relu(conv(x))))).
std::vector<float> forward_vanilla(std::span<const float> image, const VanillaNet& net);
std::vector<float> forward_vanilla(const Tensor& image, const VanillaNet& net);

}  // namespace evc
