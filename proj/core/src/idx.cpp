#include "evc/idx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "evc/errors.hpp"

namespace evc::idx {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

// Validates magic and length; returns the dimension sizes.
std::vector<std::size_t> read_header(std::span<const std::uint8_t> bytes, std::uint32_t magic,
                                     std::size_t rank) {
    if (bytes.size() < 4) {
        throw LengthError("IDX header truncated: expected at least 4 bytes, got " +
                          std::to_string(bytes.size()));
    }
    const std::uint32_t observed = read_be32(bytes, 0);
    if (observed != magic) {
        throw FormatError("IDX magic " + hex32(observed) + " does not match expected " + hex32(magic));
    }
    const std::size_t header = 4 + 4 * rank;
    if (bytes.size() < header) {
        throw LengthError("IDX header truncated: expected " + std::to_string(header) + " bytes, got " +
                          std::to_string(bytes.size()));
    }
    std::vector<std::size_t> dims(rank);
    std::size_t payload = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        dims[i] = read_be32(bytes, 4 + 4 * i);
        payload *= dims[i];
    }
    if (bytes.size() - header != payload) {
        throw LengthError("IDX payload length mismatch: expected " + std::to_string(payload) +
                          " bytes, got " + std::to_string(bytes.size() - header));
    }
    return dims;
}

}  // namespace

Tensor parse_images(std::span<const std::uint8_t> bytes) {
    auto dims = read_header(bytes, kImageMagic, 3);
    auto payload = bytes.subspan(16);
    std::vector<float> data(payload.size());
    std::transform(payload.begin(), payload.end(), data.begin(),
                   [](std::uint8_t p) { return static_cast<float>(p / 255.0); });
    return Tensor(std::move(dims), std::move(data));
}

std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes) {
    read_header(bytes, kLabelMagic, 1);
    return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> encode_labels(std::span<const std::uint8_t> labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

std::vector<std::uint8_t> encode_images(const Tensor& images) {
    if (images.rank() != 3) {
        throw DimensionError("encode_images: expected rank-3 tensor, got " + shape_string(images.shape()));
    }
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.size());
    write_be32(out, kImageMagic);
    for (std::size_t d : images.shape()) write_be32(out, static_cast<std::uint32_t>(d));
    for (float v : images.data()) {
        out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace evc::idx
