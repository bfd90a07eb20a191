/*
 * genesis.hpp
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "tnet/digest.hpp"
#include "tnet/dsl/config.hpp"

namespace tnet {

/// 32-byte account identifier, hex-encoded externally.
class AccountId {
public:
    AccountId() = default;
    explicit AccountId(const Digest& d) : value_(d) {}

    static AccountId from_hex(std::string_view hex) { return AccountId(Digest::from_hex(hex)); }
    std::string hex() const { return value_.hex(); }
    const Digest& digest() const { return value_; }

    auto operator<=>(const AccountId&) const = default;

private:
    Digest value_;
};

}  // namespace tnet

namespace tnet::genesis {

/// Domain-separation tag mixed into every account derivation.
inline constexpr std::string_view kAccountDomain = "tnet.account.v1";

/// sha256(kAccountDomain || 0x00 || configuration_name || 0x00 || node_name).
/// Names are restricted to [A-Za-z0-9_-], so the NUL separators make the
/// encoding injective.
AccountId derive_account(std::string_view configuration_name, std::string_view node_name);

struct GenesisDocument {
    std::int64_t chain_id = 0;
    std::int64_t difficulty = 0;
    std::int64_t gas_limit = 0;
    std::map<AccountId, std::int64_t> allocations;
    Digest genesis_hash;

    std::int64_t total_supply() const;
    bool operator==(const GenesisDocument&) const = default;
};

/// Canonical text of the hashed body (everything except genesisHash).
std::string canonical_body(const GenesisDocument& doc);
/// Canonical file text, genesisHash included.
std::string canonical_file(const GenesisDocument& doc);
Digest compute_genesis_hash(const GenesisDocument& doc);

/// Throws Error(InvalidConfig) when the config does not validate.
GenesisDocument make_genesis(const dsl::NetworkConfig& config);

/// Parses file text and verifies the embedded hash (Error(HashMismatch)).
GenesisDocument parse_genesis(std::string_view text);

void write_genesis(const GenesisDocument& doc, const std::filesystem::path& path);
GenesisDocument read_genesis(const std::filesystem::path& path);

}  // namespace tnet::genesis
