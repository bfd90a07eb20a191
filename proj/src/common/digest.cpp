/*
 * digest.cpp
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

#include "tnet/digest.hpp"

#include <openssl/evp.h>

#include <bit>

#include "tnet/error.hpp"

namespace tnet {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Digest Digest::from_hex(std::string_view hex) {
    if (hex.size() != 2 * kSize) {
        throw Error(Errc::SchemaError, "digest must be 64 hex characters, got " +
                                           std::to_string(hex.size()));
    }
    std::array<std::uint8_t, kSize> out{};
    for (std::size_t i = 0; i < kSize; ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::SchemaError, "invalid hex digit in digest");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return Digest(out);
}

std::string Digest::hex() const { return to_hex(bytes_); }

bool Digest::is_zero() const {
    for (auto b : bytes_)
        if (b != 0) return false;
    return true;
}

int Digest::leading_zero_bits() const {
    int bits = 0;
    for (auto b : bytes_) {
        if (b == 0) {
            bits += 8;
            continue;
        }
        return bits + std::countl_zero(b);
    }
    return bits;
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        throw Error(Errc::Internal, "EVP sha256 init failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
    return *this;
}

Sha256& Sha256::update(std::string_view data) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
    return *this;
}

Digest Sha256::finish() {
    std::array<std::uint8_t, Digest::kSize> out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
    return Digest(out);
}

Digest sha256(std::span<const std::uint8_t> data) { return Sha256().update(data).finish(); }

Digest sha256(std::string_view data) { return Sha256().update(data).finish(); }

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xf]);
    }
    return out;
}

std::string from_hex_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(Errc::SchemaError, "odd-length hex string");
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::SchemaError, "invalid hex digit");
        out.push_back(static_cast<char>(hi << 4 | lo));
    }
    return out;
}

}  // namespace tnet
