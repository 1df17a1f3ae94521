#include "evc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "evc/errors.hpp"

namespace evc {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, float fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw DimensionError("tensor shape " + shape_string(shape_) + " needs " +
                             std::to_string(element_count(shape_)) + " values, got " +
                             std::to_string(data_.size()));
    }
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor conv2d_valid(const Tensor& input, const Tensor& kernel) {
    if (input.rank() != 2 || kernel.rank() != 2 || input.dim(0) < kernel.dim(0) ||
        input.dim(1) < kernel.dim(1)) {
        throw DimensionError("conv2d_valid: input " + shape_string(input.shape()) +
                             " incompatible with kernel " + shape_string(kernel.shape()));
    }
    const std::size_t kh = kernel.dim(0), kw = kernel.dim(1);
    const std::size_t oh = input.dim(0) - kh + 1, ow = input.dim(1) - kw + 1;
    const std::size_t iw = input.dim(1);
    Tensor out({oh, ow});
    auto in = input.data();
    auto k = kernel.data();
    auto o = out.data();
    // Accumulate tap by tap so the inner loop runs over contiguous output columns.
    for (std::size_t a = 0; a < kh; ++a) {
        for (std::size_t b = 0; b < kw; ++b) {
            const float w = k[a * kw + b];
            for (std::size_t i = 0; i < oh; ++i) {
                const float* src = in.data() + (i + a) * iw + b;
                float* dst = o.data() + i * ow;
                for (std::size_t j = 0; j < ow; ++j) dst[j] += w * src[j];
            }
        }
    }
    return out;
}

PoolResult max_pool_2x2(const Tensor& input) {
    if (input.rank() != 2 || input.dim(0) < 2 || input.dim(1) < 2) {
        throw DimensionError("max_pool_2x2: input " + shape_string(input.shape()) +
                             " must be 2-D with both sides >= 2");
    }
    const std::size_t h = input.dim(0) / 2, w = input.dim(1) / 2, iw = input.dim(1);
    PoolResult r{Tensor({h, w}), std::vector<std::size_t>(h * w)};
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            std::size_t best = 2 * i * iw + 2 * j;
            for (std::size_t idx : {best + 1, best + iw, best + iw + 1}) {
                if (input[idx] > input[best]) best = idx;
            }
            r.values[i * w + j] = input[best];
            r.argmax[i * w + j] = best;
        }
    }
    return r;
}

std::vector<float> softmax(std::span<const float> logits) {
    std::vector<float> out(logits.size());
    if (logits.empty()) return out;
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> e(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        e[i] = std::exp(static_cast<double>(logits[i]) - mx);
        sum += e[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<float>(e[i] / sum);
    return out;
}

}  // namespace evc
