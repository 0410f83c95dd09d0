// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include "triage/tensor_bundle.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "trgb payloads are memcpy'd; a big-endian port needs byte swaps");

namespace triage {

namespace {

constexpr char kMagic[4] = {'T', 'R', 'G', 'B'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderAlign = 64;
constexpr std::size_t kMaxHeaderLen = 1u << 20;
constexpr std::size_t kMaxNameLen = 64;
constexpr std::size_t kMaxDims = 4;
constexpr std::int64_t kMaxElements = std::int64_t{1} << 40;

[[noreturn]] void fail(TensorIoStatus status, const std::string& what) {
    throw TensorIoError(status, what);
}

bool ascii_printable(const std::string& s) {
    for (unsigned char c : s) {
        if (c < 0x20 || c > 0x7e) return false;
    }
    return true;
}

std::int64_t checked_element_count(const std::vector<std::int64_t>& shape) {
    std::int64_t count = 1;
    for (std::int64_t dim : shape) {
        if (dim < 0) return -1;
        if (dim != 0 && count > kMaxElements / std::max<std::int64_t>(dim, 1))
            return -1;
        count *= dim;
    }
    return count;
}

}  // namespace

std::size_t dtype_width(DType dtype) {
    return dtype == DType::F32 ? 4 : 8;
}

const char* dtype_name(DType dtype) {
    return dtype == DType::F32 ? "f32" : "i64";
}

TensorBundle TensorBundle::f32(std::string name,
                               std::vector<std::int64_t> shape,
                               std::vector<float> data) {
    TensorBundle b;
    b.name_ = std::move(name);
    b.dtype_ = DType::F32;
    b.shape_ = std::move(shape);
    b.payload_.resize(data.size() * sizeof(float));
    if (!data.empty())
        std::memcpy(b.payload_.data(), data.data(), b.payload_.size());
    b.validate();
    return b;
}

TensorBundle TensorBundle::i64(std::string name,
                               std::vector<std::int64_t> shape,
                               std::vector<std::int64_t> data) {
    TensorBundle b;
    b.name_ = std::move(name);
    b.dtype_ = DType::I64;
    b.shape_ = std::move(shape);
    b.payload_.resize(data.size() * sizeof(std::int64_t));
    if (!data.empty())
        std::memcpy(b.payload_.data(), data.data(), b.payload_.size());
    b.validate();
    return b;
}

std::int64_t TensorBundle::element_count() const {
    return checked_element_count(shape_);
}

std::span<const float> TensorBundle::floats() const {
    if (dtype_ != DType::F32)
        fail(TensorIoStatus::InvalidBundle, "bundle is not f32: " + name_);
    return {reinterpret_cast<const float*>(payload_.data()),
            payload_.size() / sizeof(float)};
}

std::span<const std::int64_t> TensorBundle::ints() const {
    if (dtype_ != DType::I64)
        fail(TensorIoStatus::InvalidBundle, "bundle is not i64: " + name_);
    return {reinterpret_cast<const std::int64_t*>(payload_.data()),
            payload_.size() / sizeof(std::int64_t)};
}

bool TensorBundle::operator==(const TensorBundle& other) const {
    return name_ == other.name_ && dtype_ == other.dtype_ &&
           shape_ == other.shape_ && payload_ == other.payload_;
}

void TensorBundle::validate() const {
    if (name_.size() > kMaxNameLen || !ascii_printable(name_))
        fail(TensorIoStatus::InvalidBundle,
             "bundle name must be printable ASCII, at most 64 bytes");
    if (shape_.empty() || shape_.size() > kMaxDims)
        fail(TensorIoStatus::InvalidBundle,
             "shape must have between 1 and 4 dimensions");
    std::int64_t count = checked_element_count(shape_);
    if (count < 0)
        fail(TensorIoStatus::InvalidBundle, "shape dimensions out of range");
    if (static_cast<std::size_t>(count) * dtype_width(dtype_) !=
        payload_.size())
        fail(TensorIoStatus::InvalidBundle,
             "payload size does not match product(shape) * element width");
}

std::vector<std::byte> serialize_bundle(const TensorBundle& bundle) {
    bundle.validate();

    nlohmann::json header;
    header["name"] = bundle.name();
    header["dtype"] = dtype_name(bundle.dtype());
    header["shape"] = bundle.shape();
    const std::string json = header.dump();

    const std::size_t raw = 4 + 2 + 4 + json.size();
    const std::size_t block = (raw + kHeaderAlign - 1) / kHeaderAlign * kHeaderAlign;

    std::vector<std::byte> out(block + bundle.payload().size(), std::byte{0});
    std::memcpy(out.data(), kMagic, 4);
    out[4] = std::byte{kVersion & 0xff};
    out[5] = std::byte{kVersion >> 8};
    const std::uint32_t hlen = static_cast<std::uint32_t>(json.size());
    for (int i = 0; i < 4; ++i)
        out[6 + i] = std::byte{static_cast<unsigned char>(hlen >> (8 * i))};
    std::memcpy(out.data() + 10, json.data(), json.size());
    if (!bundle.payload().empty())
        std::memcpy(out.data() + block, bundle.payload().data(),
                    bundle.payload().size());
    return out;
}

std::size_t write_bundle(const TensorBundle& bundle, std::ostream& out) {
    const std::vector<std::byte> bytes = serialize_bundle(bundle);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        fail(TensorIoStatus::IoFailure, "failed to write bundle " + bundle.name());
    return bytes.size();
}

namespace {

TensorBundle parse_bundle(std::span<const std::byte> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(TensorIoStatus::BadMagic, "not a trgb file (bad magic)");
    if (bytes.size() < 10)
        fail(TensorIoStatus::MalformedHeader, "truncated header prefix");

    const std::uint16_t version =
        static_cast<std::uint16_t>(std::to_integer<unsigned>(bytes[4]) |
                                   (std::to_integer<unsigned>(bytes[5]) << 8));
    if (version != kVersion)
        fail(TensorIoStatus::UnsupportedVersion,
             "unsupported trgb version " + std::to_string(version));

    std::uint32_t hlen = 0;
    for (int i = 0; i < 4; ++i)
        hlen |= std::to_integer<std::uint32_t>(bytes[6 + i]) << (8 * i);
    if (hlen == 0 || hlen > kMaxHeaderLen)
        fail(TensorIoStatus::MalformedHeader, "implausible header length");

    const std::size_t raw = 10 + static_cast<std::size_t>(hlen);
    const std::size_t block = (raw + kHeaderAlign - 1) / kHeaderAlign * kHeaderAlign;
    if (bytes.size() < block)
        fail(TensorIoStatus::MalformedHeader, "truncated header block");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(
            reinterpret_cast<const char*>(bytes.data()) + 10,
            reinterpret_cast<const char*>(bytes.data()) + raw);
    } catch (const nlohmann::json::exception&) {
        fail(TensorIoStatus::MalformedHeader, "header is not valid JSON");
    }
    if (!header.is_object() || header.size() != 3 || !header.contains("name") ||
        !header.contains("dtype") || !header.contains("shape"))
        fail(TensorIoStatus::MalformedHeader,
             "header must be exactly {name, dtype, shape}");
    if (!header["name"].is_string() || !header["dtype"].is_string() ||
        !header["shape"].is_array())
        fail(TensorIoStatus::MalformedHeader, "header field has wrong type");

    const std::string name = header["name"].get<std::string>();
    if (name.size() > kMaxNameLen || !ascii_printable(name))
        fail(TensorIoStatus::MalformedHeader, "invalid bundle name");

    const std::string dtype_str = header["dtype"].get<std::string>();
    DType dtype;
    if (dtype_str == "f32") {
        dtype = DType::F32;
    } else if (dtype_str == "i64") {
        dtype = DType::I64;
    } else {
        fail(TensorIoStatus::MalformedHeader, "unknown dtype " + dtype_str);
    }

    std::vector<std::int64_t> shape;
    for (const auto& dim : header["shape"]) {
        if (!dim.is_number_integer())
            fail(TensorIoStatus::MalformedHeader, "shape entry is not an integer");
        const std::int64_t v = dim.get<std::int64_t>();
        if (v < 0)
            fail(TensorIoStatus::MalformedHeader, "negative shape dimension");
        shape.push_back(v);
    }
    if (shape.empty() || shape.size() > kMaxDims)
        fail(TensorIoStatus::MalformedHeader,
             "shape must have between 1 and 4 dimensions");
    const std::int64_t count = checked_element_count(shape);
    if (count < 0)
        fail(TensorIoStatus::MalformedHeader, "shape product out of range");

    for (std::size_t i = raw; i < block; ++i) {
        if (bytes[i] != std::byte{0})
            fail(TensorIoStatus::MalformedHeader, "nonzero header padding");
    }

    const std::size_t expected =
        static_cast<std::size_t>(count) * dtype_width(dtype);
    if (bytes.size() - block != expected)
        fail(TensorIoStatus::LengthMismatch,
             "payload is " + std::to_string(bytes.size() - block) +
                 " bytes, header claims " + std::to_string(expected));

    if (dtype == DType::F32) {
        std::vector<float> data(static_cast<std::size_t>(count));
        if (count > 0)
            std::memcpy(data.data(), bytes.data() + block, expected);
        return TensorBundle::f32(name, std::move(shape), std::move(data));
    }
    std::vector<std::int64_t> data(static_cast<std::size_t>(count));
    if (count > 0)
        std::memcpy(data.data(), bytes.data() + block, expected);
    return TensorBundle::i64(name, std::move(shape), std::move(data));
}

}  // namespace

TensorBundle deserialize_bundle(std::span<const std::byte> bytes) {
    return parse_bundle(bytes);
}

TensorBundle read_bundle(std::istream& in) {
    std::vector<std::byte> bytes;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::size_t got = static_cast<std::size_t>(in.gcount());
        const std::size_t old = bytes.size();
        bytes.resize(old + got);
        std::memcpy(bytes.data() + old, buf, got);
        if (in.eof()) break;
    }
    if (in.bad())
        fail(TensorIoStatus::IoFailure, "stream read failure");
    return parse_bundle(bytes);
}

std::size_t write_bundle_file(const TensorBundle& bundle,
                              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(TensorIoStatus::IoFailure, "cannot open " + path.string());
    return write_bundle(bundle, out);
}

TensorBundle read_bundle_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(TensorIoStatus::IoFailure, "cannot open " + path.string());
    return read_bundle(in);
}

}  // namespace triage
