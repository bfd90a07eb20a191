/*
 * chain_state.hpp
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

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tnet/genesis/genesis.hpp"
#include "tnet/node/types.hpp"

namespace tnet::node {

enum class RejectReason { BadParent, BadPow, BadTx };

std::string_view reject_name(RejectReason reason);

struct ApplyResult {
    bool accepted = false;
    RejectReason reason = RejectReason::BadTx;
    std::string detail;

    static ApplyResult ok() { return {true, RejectReason::BadTx, {}}; }
    static ApplyResult reject(RejectReason r, std::string d) { return {false, r, std::move(d)}; }
};

/// A node's ledger. Not thread-safe; ChainNode serializes access.
class ChainState {
public:
    explicit ChainState(const genesis::GenesisDocument& genesis);

    const genesis::GenesisDocument& genesis() const { return genesis_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& tip() const { return blocks_.back(); }
    std::int64_t height() const { return tip().height; }
    int target_bits() const { return target_bits_; }
    std::int64_t gas_limit() const { return genesis_.gas_limit; }

    std::int64_t balance(const AccountId& account) const;
    std::int64_t next_nonce(const AccountId& account) const;
    const std::map<AccountId, std::int64_t>& balances() const { return balances_; }
    const std::map<AccountId, std::int64_t>& nonces() const { return nonces_; }
    std::int64_t total_supply() const;

    /// Height of the block that applied tx_id, if any.
    std::optional<std::int64_t> find_transaction(const Digest& tx_id) const;
    const Transaction* transaction(const Digest& tx_id) const;

    /// Validates and appends atomically; state is untouched on rejection.
    ApplyResult apply_block(const Block& block);

private:
    genesis::GenesisDocument genesis_;
    int target_bits_;
    std::vector<Block> blocks_;
    std::map<AccountId, std::int64_t> balances_;
    std::map<AccountId, std::int64_t> nonces_;
    std::unordered_map<Digest, std::pair<std::int64_t, std::size_t>> tx_index_;  // height, position
};

/// Throws InsufficientBalance / BadNonce / CostExceedsGasLimit /
/// MalformedRequest for a transaction checked against the given sender view.
void check_transaction(const Transaction& tx, std::int64_t gas_limit, std::int64_t expected_nonce,
                       std::int64_t available_balance);

/// Replays `blocks` from genesis, checking parent links, proof-of-work and
/// every transaction. Returns a description of the first problem found.
std::optional<std::string> audit_chain(const genesis::GenesisDocument& genesis, const std::vector<Block>& blocks);

/// Searches pow_nonce until the header hash has target_bits leading zeros.
/// Returns nullopt if `abort` is raised first.
std::optional<Block> solve_pow(Block candidate, int target_bits, const std::atomic<bool>& abort);

/// Pending transactions not yet in a block, with nonce/balance bookkeeping
/// layered over a ChainState.
class Mempool {
public:
    bool contains(const Digest& tx_id) const { return by_id_.contains(tx_id); }
    std::size_t size() const { return by_id_.size(); }
    bool empty() const { return by_id_.empty(); }
    const Transaction* find(const Digest& tx_id) const;

    std::int64_t pending_nonce(const ChainState& state, const AccountId& sender) const;
    std::int64_t pending_outgoing(const AccountId& sender) const;

    /// Validates against chain + pending view and inserts. Returns false for a
    /// duplicate tx_id (already pending or already mined). Throws on invalid.
    bool admit(const ChainState& state, const Transaction& tx);

    /// Up to max_txs transactions that apply cleanly on top of `state`.
    std::vector<Transaction> select(const ChainState& state, std::size_t max_txs) const;

    /// Drops transactions that were mined or can no longer apply.
    void prune(const ChainState& state);

    /// Insertion order.
    std::vector<Transaction> all() const;

private:
    std::map<Digest, Transaction> by_id_;
    std::vector<Digest> order_;
};

}  // namespace tnet::node
