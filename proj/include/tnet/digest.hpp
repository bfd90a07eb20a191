/*
 * digest.hpp
 *
 * Copyright 2026 The tnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace tnet {

/// 32-byte SHA-256 digest. Used for account ids, transaction ids, block
/// hashes and payload commitments.
class Digest {
public:
    static constexpr std::size_t kSize = 32;

    Digest() = default;
    explicit Digest(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

    static Digest zero() { return Digest{}; }
    /// Throws Error(SchemaError) unless `hex` is exactly 64 hex digits.
    static Digest from_hex(std::string_view hex);

    std::string hex() const;
    bool is_zero() const;
    /// Number of leading zero bits, 0..256.
    int leading_zero_bits() const;

    const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }

    auto operator<=>(const Digest&) const = default;

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// Incremental hasher for multi-part inputs.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view data);
    Digest finish();

private:
    void* ctx_;
};

std::string to_hex(std::span<const std::uint8_t> data);
std::string from_hex_bytes(std::string_view hex);

}  // namespace tnet

template <>
struct std::hash<tnet::Digest> {
    std::size_t operator()(const tnet::Digest& d) const noexcept {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes()[i];
        return h;
    }
};
