/*
 * types.hpp
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

#include "tnet/digest.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/json.hpp"

namespace tnet::node {

struct Transaction {
    AccountId sender;
    AccountId recipient;
    std::int64_t value = 0;
    std::optional<Digest> payload_hash;
    std::int64_t nonce = 0;
    std::int64_t cost = 1;
    Digest tx_id;  // sha256 of canonical_fields()

    /// Canonical JSON of every field except txId.
    std::string canonical_fields() const;
    Digest compute_id() const;
    /// Recomputes and stores tx_id.
    Transaction& seal();

    Json to_json() const;
    /// Does not verify tx_id; see ChainState for integrity checks.
    static Transaction from_json(const Json& j);

    bool operator==(const Transaction&) const = default;
};

/// Transaction cost schedule used by wrappers. A plain transfer costs
/// kTransferCost; attaching a payload commitment adds kCommitmentCost.
inline constexpr std::int64_t kTransferCost = 21000;
inline constexpr std::int64_t kCommitmentCost = 2048;

struct Block {
    std::int64_t height = 0;
    Digest parent_hash;
    std::int64_t timestamp = 0;
    AccountId miner;
    std::uint64_t pow_nonce = 0;
    std::vector<Transaction> transactions;
    Digest block_hash;

    /// sha256 over the concatenated tx ids, in block order.
    Digest tx_root() const;
    /// Hash of the header (height, parent, timestamp, miner, powNonce, txRoot).
    Digest compute_hash() const;

    Json to_json() const;
    static Block from_json(const Json& j);

    bool operator==(const Block&) const = default;
};

/// Height-0 block standing for the genesis document.
Block genesis_block(const genesis::GenesisDocument& doc);

/// clamp(ceil(log2(difficulty)), 4, 24). Difficulty must be >= 1.
int pow_target(std::int64_t difficulty);

enum class FaultMode { None, StallMempool, Unresponsive };

std::string_view fault_name(FaultMode mode);
/// Throws Error(MalformedRequest) for unknown names.
FaultMode parse_fault(std::string_view name);

}  // namespace tnet::node
