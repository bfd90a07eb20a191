/*
 * config.hpp
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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tnet::dsl {

enum class Role { Prosumer, Dso, Miner };

std::string_view role_name(Role role);

struct GenesisParams {
    std::int64_t chain_id = 0;
    std::int64_t difficulty = 0;
    std::int64_t gas_limit = 0;
    std::int64_t balance = 0;

    bool operator==(const GenesisParams&) const = default;
};

struct NodeSpec {
    std::string name;
    Role role = Role::Prosumer;
    std::string host;
    std::uint16_t blockchain_port = 0;
    std::uint16_t admin_port = 0;
    std::optional<std::uint16_t> wrapper_port;  // clients only

    bool is_miner() const { return role == Role::Miner; }
    std::vector<std::uint16_t> ports() const;

    bool operator==(const NodeSpec&) const = default;
};

struct NetworkConfig {
    std::string configuration_name;
    std::string configuration_version;
    GenesisParams genesis;
    std::vector<NodeSpec> clients;
    std::vector<NodeSpec> miners;

    /// Miners first, then clients, each in document order.
    std::vector<const NodeSpec*> all_nodes() const;

    bool operator==(const NetworkConfig&) const = default;
};

struct Issue {
    std::string code;
    std::string message;
    std::vector<std::string> nodes;  // sorted

    bool operator==(const Issue&) const = default;
};

struct ValidationReport {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;

    bool deployable() const { return errors.empty(); }
    bool operator==(const ValidationReport&) const = default;
};

// Issue codes.
inline constexpr std::string_view kPortConflict = "PORT_CONFLICT";
inline constexpr std::string_view kPortDuplicate = "PORT_DUPLICATE";
inline constexpr std::string_view kPortRange = "PORT_RANGE";
inline constexpr std::string_view kDuplicateName = "DUPLICATE_NAME";
inline constexpr std::string_view kInvalidName = "INVALID_NAME";
inline constexpr std::string_view kMissingWrapperPort = "MISSING_WRAPPER_PORT";
inline constexpr std::string_view kRoleMismatch = "ROLE_MISMATCH";
inline constexpr std::string_view kNoClients = "NO_CLIENTS";
inline constexpr std::string_view kNoMiners = "NO_MINERS";
inline constexpr std::string_view kGenesisRange = "GENESIS_RANGE";
inline constexpr std::string_view kChainIdReserved = "CHAIN_ID_RESERVED";

/// Parses a configuration document. Throws Error(SyntaxError) for malformed
/// JSON and Error(SchemaError) for missing, mistyped or unknown keys.
NetworkConfig parse_config(std::string_view text);
NetworkConfig load_config(const std::string& path);

/// Canonical JSON text of the document; parse_config(serialize_config(c)) == c.
std::string serialize_config(const NetworkConfig& config);

/// Consistency checks. Never throws; violations are reported as data.
ValidationReport validate(const NetworkConfig& config);

/// Throws Error(NotFound).
const NodeSpec& node_lookup(const NetworkConfig& config, std::string_view name);

bool valid_identifier(std::string_view name);

}  // namespace tnet::dsl
