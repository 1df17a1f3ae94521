#include "evc/rng.hpp"

#include <cmath>
#include <numbers>

#include "evc/errors.hpp"

namespace evc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id), key_(mix64(mix64(seed) ^ (stream_id * kGolden + 0x632BE59BD9B4E019ull))) {}

std::uint64_t RngStream::next_u64() noexcept {
    // Two mixing rounds over (key, counter) keep adjacent counters uncorrelated.
    const std::uint64_t c = counter_++;
    return mix64(mix64(key_ + c * kGolden) ^ c);
}

double RngStream::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
    // Rejection sampling on the top of the range.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double RngStream::normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t stream_id(std::string_view name, std::uint64_t index) noexcept {
    // FNV-1a over the name, then fold in the index.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return mix64(h ^ mix64(index + kGolden));
}

Tensor gaussian_sample(RngStream& rng, const Tensor& mean, double variance) {
    if (!(variance >= 0.0)) {
        throw DomainError("gaussian_sample: variance must be >= 0, got " + std::to_string(variance));
    }
    Tensor out = mean;
    if (variance == 0.0) return out;
    const double sd = std::sqrt(variance);
    for (float& v : out.data()) v = static_cast<float>(v + sd * rng.normal());
    return out;
}

}  // namespace evc
