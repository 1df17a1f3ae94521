#include "evc/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "evc/errors.hpp"
#include "evc/idx.hpp"

namespace evc {

namespace {

constexpr char kMagic[4] = {'E', 'V', 'C', '1'};
constexpr std::size_t kHeaderBytes = 4 + 5 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return std::uint32_t{b[off]} | (std::uint32_t{b[off + 1]} << 8) | (std::uint32_t{b[off + 2]} << 16) |
           (std::uint32_t{b[off + 3]} << 24);
}

std::uint32_t narrow(std::size_t v, const char* field) {
    if (v > UINT32_MAX) throw CheckpointError(field, "value does not fit in u32");
    return static_cast<std::uint32_t>(v);
}

std::vector<std::uint8_t> encode(ModelKind kind, const Architecture& arch, std::span<const float> params) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put_u32(out, static_cast<std::uint32_t>(kind));
    put_u32(out, narrow(arch.kernels, "N"));
    put_u32(out, narrow(arch.kernel_size, "d"));
    put_u32(out, narrow(arch.fc_inputs(), "F"));
    put_u32(out, narrow(arch.classes, "class-count"));
    out.reserve(out.size() + 4 * params.size());
    for (float f : params) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const BayesianNet& net) {
    return encode(ModelKind::bayesian, net.arch(), net.params());
}

std::vector<std::uint8_t> encode_checkpoint(const VanillaNet& net) {
    return encode(ModelKind::vanilla, net.arch(), net.params());
}

AnyNet decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw CheckpointError("magic", "expected \"EVC1\"");
    }
    const char* names[] = {"model-kind", "N", "d", "F", "class-count"};
    std::uint32_t header[5];
    for (std::size_t i = 0; i < 5; ++i) {
        if (bytes.size() < 8 + 4 * i) throw CheckpointError(names[i], "file truncated in header");
        header[i] = get_u32(bytes, 4 + 4 * i);
    }
    if (header[0] > 1) throw CheckpointError("model-kind", "unknown value " + std::to_string(header[0]));
    const auto kind = static_cast<ModelKind>(header[0]);
    Architecture arch;
    arch.kernels = header[1];
    arch.kernel_size = header[2];
    arch.classes = header[4];
    if (arch.kernels < 1) throw CheckpointError("N", "must be >= 1");
    if (arch.kernel_size < 1) throw CheckpointError("d", "must be >= 1");
    if (arch.classes < 1) throw CheckpointError("class-count", "must be >= 1");
    // Input side follows from F = pooled^2 * N.
    const std::uint32_t f = header[3];
    const auto pooled = static_cast<std::size_t>(std::llround(std::sqrt(double(f) / double(arch.kernels))));
    if (pooled < 1 || pooled * pooled * arch.kernels != f) {
        throw CheckpointError("F", std::to_string(f) + " is not pooled^2 * N for N=" + std::to_string(arch.kernels));
    }
    arch.input_size = 2 * pooled + arch.kernel_size - 1;

    const std::size_t count = ParamLayout::of(kind, arch).total;
    const std::size_t expected = kHeaderBytes + 4 * count;
    if (bytes.size() != expected) {
        throw CheckpointError("parameters", "expected " + std::to_string(expected) + " bytes, got " +
                                                std::to_string(bytes.size()));
    }
    std::vector<float> params(count);
    for (std::size_t i = 0; i < count; ++i) {
        params[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
    }
    try {
        if (kind == ModelKind::bayesian) return BayesianNet(arch, std::move(params));
        return VanillaNet(arch, std::move(params));
    } catch (const DimensionError& e) {
        throw CheckpointError("d", e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const BayesianNet& net) {
    write_bytes(path, encode_checkpoint(net));
}

void save_checkpoint(const std::filesystem::path& path, const VanillaNet& net) {
    write_bytes(path, encode_checkpoint(net));
}

AnyNet load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(idx::read_file(path));
}

}  // namespace evc
