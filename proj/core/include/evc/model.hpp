#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evc {

enum class ModelKind : std::uint32_t { bayesian = 0, vanilla = 1 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

/// conv(d x d, valid) -> ReLU -> 2x2 max-pool -> fully connected -> softmax,
/// on square single-channel inputs.
struct Architecture {
    std::size_t kernels = 100;
    std::size_t kernel_size = 5;
    std::size_t input_size = 28;
    std::size_t classes = 10;

    std::size_t conv_out() const noexcept { return input_size - kernel_size + 1; }
    std::size_t pooled() const noexcept { return conv_out() / 2; }
    std::size_t pooled_area() const noexcept { return pooled() * pooled(); }
    std::size_t kernel_area() const noexcept { return kernel_size * kernel_size; }
    std::size_t fc_inputs() const noexcept { return pooled_area() * kernels; }

    // Throws DimensionError unless kernels >= 1 and the conv output is even and >= 2.
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Offsets of each parameter block inside a model's flat parameter vector.
/// The block order is also the checkpoint order; vanilla models have empty
/// rho blocks.
struct ParamLayout {
    std::size_t conv_mu = 0;
    std::size_t conv_rho = 0;
    std::size_t fc_mu = 0;
    std::size_t fc_rho = 0;
    std::size_t fc_bias = 0;
    std::size_t total = 0;

    static ParamLayout of(ModelKind kind, const Architecture& arch);
};

/// sigma^2 = ln(1 + e^rho), evaluated without overflow.
template <typename T>
T softplus(T rho) {
    return rho > T(30) ? rho : std::log1p(std::exp(rho));
}

/// d softplus / d rho.
template <typename T>
T sigmoid(T rho) {
    return T(1) / (T(1) + std::exp(-rho));
}

/// Inverse of softplus for sigma2 > 0.
double softplus_inverse(double sigma2);

}  // namespace evc
