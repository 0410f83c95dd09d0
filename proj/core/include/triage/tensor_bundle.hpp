// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "triage/errors.hpp"

namespace triage {

enum class DType { F32, I64 };

std::size_t dtype_width(DType dtype);
const char* dtype_name(DType dtype);

enum class TensorIoStatus {
    BadMagic,
    UnsupportedVersion,
    MalformedHeader,
    LengthMismatch,
    InvalidBundle,
    IoFailure,
};

class TensorIoError : public InputError {
public:
    TensorIoError(TensorIoStatus status, const std::string& what)
        : InputError(what), status_(status) {}
    TensorIoStatus status() const { return status_; }

private:
    TensorIoStatus status_;
};

// Immutable typed multi-dimensional array with a bit-exact on-disk format
// (".trgb"): magic "TRGB", version u16, header length u32, a JSON header
// {name, dtype, shape}, zero padding to a 64-byte boundary, then the raw
// little-endian row-major payload.
class TensorBundle {
public:
    TensorBundle() = default;

    static TensorBundle f32(std::string name, std::vector<std::int64_t> shape,
                            std::vector<float> data);
    static TensorBundle i64(std::string name, std::vector<std::int64_t> shape,
                            std::vector<std::int64_t> data);

    const std::string& name() const { return name_; }
    DType dtype() const { return dtype_; }
    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t element_count() const;

    std::span<const float> floats() const;
    std::span<const std::int64_t> ints() const;
    std::span<const std::byte> payload() const { return payload_; }

    // Field-by-field equality; payloads compared bitwise (NaN-safe).
    bool operator==(const TensorBundle& other) const;

    // Throws TensorIoError{InvalidBundle} if any invariant is violated.
    void validate() const;

private:
    std::string name_;
    DType dtype_ = DType::F32;
    std::vector<std::int64_t> shape_{0};
    std::vector<std::byte> payload_;
};

// Returns total bytes written. Rejects invalid bundles before writing
// anything.
std::size_t write_bundle(const TensorBundle& bundle, std::ostream& out);
std::vector<std::byte> serialize_bundle(const TensorBundle& bundle);

TensorBundle read_bundle(std::istream& in);
TensorBundle deserialize_bundle(std::span<const std::byte> bytes);

std::size_t write_bundle_file(const TensorBundle& bundle,
                              const std::filesystem::path& path);
TensorBundle read_bundle_file(const std::filesystem::path& path);

}  // namespace triage
