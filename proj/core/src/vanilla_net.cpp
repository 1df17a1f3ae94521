#include "evc/vanilla_net.hpp"

#include <algorithm>

#include "evc/engine.hpp"
#include "evc/errors.hpp"
#include "evc/evi_net.hpp"

namespace evc {

VanillaNet::VanillaNet(Architecture arch)
    : arch_(arch), layout_(ParamLayout::of(ModelKind::vanilla, arch)), params_(layout_.total, 0.0f) {
    arch_.validate();
}

VanillaNet::VanillaNet(Architecture arch, std::vector<float> params)
    : arch_(arch), layout_(ParamLayout::of(ModelKind::vanilla, arch)), params_(std::move(params)) {
    arch_.validate();
    if (params_.size() != layout_.total) {
        throw DimensionError("vanilla net needs " + std::to_string(layout_.total) + " parameters, got " +
                             std::to_string(params_.size()));
    }
}

VanillaNet VanillaNet::initialized(const Architecture& arch, std::uint64_t seed) {
    return from_means(BayesianNet::initialized(arch, seed));
}

VanillaNet VanillaNet::from_means(const BayesianNet& net) {
    VanillaNet out(net.arch());
    const auto& src = net.layout();
    const auto& dst = out.layout_;
    auto p = net.params();
    std::copy(p.begin() + src.conv_mu, p.begin() + src.conv_rho, out.params_.begin() + dst.conv_mu);
    std::copy(p.begin() + src.fc_mu, p.begin() + src.fc_rho, out.params_.begin() + dst.fc_mu);
    std::copy(p.begin() + src.fc_bias, p.end(), out.params_.begin() + dst.fc_bias);
    return out;
}

std::span<float> VanillaNet::kernel(std::size_t n) {
    return std::span(params_).subspan(layout_.conv_mu + n * arch_.kernel_area(), arch_.kernel_area());
}

std::span<const float> VanillaNet::kernel(std::size_t n) const {
    return std::span(params_).subspan(layout_.conv_mu + n * arch_.kernel_area(), arch_.kernel_area());
}

std::span<float> VanillaNet::fc_row(std::size_t k) {
    return std::span(params_).subspan(layout_.fc_mu + k * arch_.fc_inputs(), arch_.fc_inputs());
}

std::span<const float> VanillaNet::fc_row(std::size_t k) const {
    return std::span(params_).subspan(layout_.fc_mu + k * arch_.fc_inputs(), arch_.fc_inputs());
}

std::vector<float> forward_vanilla(std::span<const float> image, const VanillaNet& net) {
    engine::VanillaState<float> s(net.arch());
    engine::vanilla_forward<float>(net.arch(), net.params(), image, s);
    return s.probs;
}

std::vector<float> forward_vanilla(const Tensor& image, const VanillaNet& net) {
    return forward_vanilla(image.data(), net);
}

}  // namespace evc
