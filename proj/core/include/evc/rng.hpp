#pragma once

#include <cstdint>
#include <string_view>

#include "evc/tensor.hpp"

namespace evc {

/// Counter-based random stream. The n-th draw is a pure function of
/// (seed, stream id, n), so sequences are identical on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept;
    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform integer in [0, bound) without modulo bias. bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;
    // Standard normal via Box-Muller; draws are not cached between calls.
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stable 64-bit id for a named stream ("init", "shuffle", ...).
std::uint64_t stream_id(std::string_view name, std::uint64_t index = 0) noexcept;

/// i.i.d. draws from N(mean_i, variance). variance == 0 returns mean unchanged.
Tensor gaussian_sample(RngStream& rng, const Tensor& mean, double variance);

}  // namespace evc
