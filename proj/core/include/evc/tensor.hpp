#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace evc {

/// Dense row-major float tensor. The shape is fixed at construction.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, float fill = 0.0f);
    Tensor(std::vector<std::size_t> shape, std::vector<float> data);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // 2-D access for rank-2 tensors.
    float& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Valid (no padding), stride-1 cross-correlation of a 2-D input with a 2-D kernel.
Tensor conv2d_valid(const Tensor& input, const Tensor& kernel);

struct PoolResult {
    Tensor values;
    // Flat row-major input index chosen for each output cell.
    std::vector<std::size_t> argmax;
};

/// 2x2 stride-2 max pooling; odd trailing row/column is dropped, ties go to the
/// first element in row-major window order.
PoolResult max_pool_2x2(const Tensor& input);

/// Numerically stable softmax (max-subtracted, accumulated in double).
std::vector<float> softmax(std::span<const float> logits);

}  // namespace evc
