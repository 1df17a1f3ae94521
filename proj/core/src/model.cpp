#include "evc/model.hpp"

#include "evc/errors.hpp"

namespace evc {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::bayesian ? "bayesian" : "vanilla";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "bayesian") return ModelKind::bayesian;
    if (s == "vanilla") return ModelKind::vanilla;
    throw DomainError("unknown model kind '" + s + "' (expected bayesian or vanilla)");
}

void Architecture::validate() const {
    if (kernels < 1) throw DimensionError("architecture needs at least one kernel");
    if (kernel_size < 1 || classes < 1) throw DimensionError("kernel size and class count must be positive");
    if (input_size < kernel_size + 1) {
        throw DimensionError("input " + std::to_string(input_size) + " too small for kernel " +
                             std::to_string(kernel_size));
    }
    if (conv_out() % 2 != 0) {
        throw DimensionError("conv output side " + std::to_string(conv_out()) + " must be even for 2x2 pooling");
    }
}

ParamLayout ParamLayout::of(ModelKind kind, const Architecture& arch) {
    const bool bayes = kind == ModelKind::bayesian;
    ParamLayout l;
    l.conv_mu = 0;
    l.conv_rho = l.conv_mu + arch.kernels * arch.kernel_area();
    l.fc_mu = l.conv_rho + (bayes ? arch.kernels : 0);
    l.fc_rho = l.fc_mu + arch.classes * arch.fc_inputs();
    l.fc_bias = l.fc_rho + (bayes ? arch.classes : 0);
    l.total = l.fc_bias + arch.classes;
    return l;
}

double softplus_inverse(double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("softplus_inverse needs sigma2 > 0");
    return sigma2 > 30.0 ? sigma2 : std::log(std::expm1(sigma2));
}

}  // namespace evc
