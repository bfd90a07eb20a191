/*
 * chain_state.cpp
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

#include "tnet/node/chain_state.hpp"

#include <algorithm>

#include "tnet/error.hpp"

namespace tnet::node {

std::string_view reject_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::BadParent: return "BadParent";
        case RejectReason::BadPow: return "BadPow";
        case RejectReason::BadTx: return "BadTx";
    }
    return "BadTx";
}

ChainState::ChainState(const genesis::GenesisDocument& genesis)
    : genesis_(genesis), target_bits_(pow_target(genesis.difficulty)), balances_(genesis.allocations) {
    blocks_.push_back(genesis_block(genesis));
}

std::int64_t ChainState::balance(const AccountId& account) const {
    auto it = balances_.find(account);
    return it == balances_.end() ? 0 : it->second;
}

std::int64_t ChainState::next_nonce(const AccountId& account) const {
    auto it = nonces_.find(account);
    return it == nonces_.end() ? 0 : it->second;
}

std::int64_t ChainState::total_supply() const {
    std::int64_t sum = 0;
    for (const auto& [_, b] : balances_) sum += b;
    return sum;
}

std::optional<std::int64_t> ChainState::find_transaction(const Digest& tx_id) const {
    auto it = tx_index_.find(tx_id);
    if (it == tx_index_.end()) return std::nullopt;
    return it->second.first;
}

const Transaction* ChainState::transaction(const Digest& tx_id) const {
    auto it = tx_index_.find(tx_id);
    if (it == tx_index_.end()) return nullptr;
    return &blocks_[static_cast<std::size_t>(it->second.first)].transactions[it->second.second];
}

void check_transaction(const Transaction& tx, std::int64_t gas_limit, std::int64_t expected_nonce,
                       std::int64_t available_balance) {
    if (tx.compute_id() != tx.tx_id) throw Error(Errc::MalformedRequest, "txId does not match transaction fields");
    if (tx.value < 0) throw Error(Errc::MalformedRequest, "negative value");
    if (tx.cost < 1) throw Error(Errc::MalformedRequest, "cost must be positive");
    if (tx.cost > gas_limit)
        throw Error(Errc::CostExceedsGasLimit,
                    "cost " + std::to_string(tx.cost) + " exceeds gas limit " + std::to_string(gas_limit));
    if (tx.nonce != expected_nonce)
        throw Error(Errc::BadNonce,
                    "nonce " + std::to_string(tx.nonce) + ", expected " + std::to_string(expected_nonce));
    if (tx.value > available_balance)
        throw Error(Errc::InsufficientBalance, "value " + std::to_string(tx.value) + " exceeds available balance " +
                                                   std::to_string(available_balance));
}

ApplyResult ChainState::apply_block(const Block& block) {
    if (block.height != height() + 1 || block.parent_hash != tip().block_hash)
        return ApplyResult::reject(RejectReason::BadParent, "block " + std::to_string(block.height) +
                                                                " does not extend tip " + std::to_string(height()));

    // Work on copies of the touched entries so rejection leaves state intact.
    std::map<AccountId, std::int64_t> balances;
    std::map<AccountId, std::int64_t> nonces;
    auto bal = [&](const AccountId& a) -> std::int64_t& {
        auto it = balances.find(a);
        if (it == balances.end()) it = balances.emplace(a, balance(a)).first;
        return it->second;
    };
    auto non = [&](const AccountId& a) -> std::int64_t& {
        auto it = nonces.find(a);
        if (it == nonces.end()) it = nonces.emplace(a, next_nonce(a)).first;
        return it->second;
    };
    std::unordered_map<Digest, std::size_t> seen;
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        if (tx_index_.contains(tx.tx_id) || seen.contains(tx.tx_id))
            return ApplyResult::reject(RejectReason::BadTx, "transaction " + tx.tx_id.hex() + " already applied");
        try {
            check_transaction(tx, gas_limit(), non(tx.sender), bal(tx.sender));
        } catch (const Error& e) {
            return ApplyResult::reject(RejectReason::BadTx, e.what());
        }
        bal(tx.sender) -= tx.value;
        bal(tx.recipient) += tx.value;
        non(tx.sender) += 1;
        seen.emplace(tx.tx_id, i);
    }

    if (block.compute_hash() != block.block_hash)
        return ApplyResult::reject(RejectReason::BadPow, "block hash does not match header");
    if (block.block_hash.leading_zero_bits() < target_bits_)
        return ApplyResult::reject(RejectReason::BadPow, "insufficient proof of work");

    for (auto& [a, b] : balances) balances_[a] = b;
    for (auto& [a, n] : nonces) nonces_[a] = n;
    for (auto& [id, pos] : seen) tx_index_.emplace(id, std::make_pair(block.height, pos));
    blocks_.push_back(block);
    return ApplyResult::ok();
}

std::optional<std::string> audit_chain(const genesis::GenesisDocument& genesis, const std::vector<Block>& blocks) {
    if (blocks.empty()) return "chain is empty";
    if (blocks.front() != genesis_block(genesis)) return "block 0 is not the genesis block";
    ChainState replay(genesis);
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (blocks[i].parent_hash != blocks[i - 1].block_hash)
            return "block " + std::to_string(i) + " parent hash mismatch";
        auto r = replay.apply_block(blocks[i]);
        if (!r.accepted)
            return "block " + std::to_string(i) + " rejected: " + std::string(reject_name(r.reason)) + " " + r.detail;
        if (replay.total_supply() != genesis.total_supply())
            return "currency not conserved at block " + std::to_string(i);
    }
    return std::nullopt;
}

std::optional<Block> solve_pow(Block candidate, int target_bits, const std::atomic<bool>& abort) {
    for (std::uint64_t nonce = 0;; ++nonce) {
        if ((nonce & 0xfff) == 0 && abort.load(std::memory_order_relaxed)) return std::nullopt;
        candidate.pow_nonce = nonce;
        candidate.block_hash = candidate.compute_hash();
        if (candidate.block_hash.leading_zero_bits() >= target_bits) return candidate;
    }
}

const Transaction* Mempool::find(const Digest& tx_id) const {
    auto it = by_id_.find(tx_id);
    return it == by_id_.end() ? nullptr : &it->second;
}

std::int64_t Mempool::pending_nonce(const ChainState& state, const AccountId& sender) const {
    std::int64_t n = state.next_nonce(sender);
    for (const auto& [_, tx] : by_id_)
        if (tx.sender == sender) ++n;
    return n;
}

std::int64_t Mempool::pending_outgoing(const AccountId& sender) const {
    std::int64_t sum = 0;
    for (const auto& [_, tx] : by_id_)
        if (tx.sender == sender) sum += tx.value;
    return sum;
}

bool Mempool::admit(const ChainState& state, const Transaction& tx) {
    if (by_id_.contains(tx.tx_id) || state.find_transaction(tx.tx_id)) return false;
    check_transaction(tx, state.gas_limit(), pending_nonce(state, tx.sender),
                      state.balance(tx.sender) - pending_outgoing(tx.sender));
    by_id_.emplace(tx.tx_id, tx);
    order_.push_back(tx.tx_id);
    return true;
}

std::vector<Transaction> Mempool::select(const ChainState& state, std::size_t max_txs) const {
    std::vector<Transaction> out;
    std::map<AccountId, std::int64_t> balances;
    std::map<AccountId, std::int64_t> nonces;
    for (const auto& id : order_) {
        if (out.size() >= max_txs) break;
        const auto& tx = by_id_.at(id);
        if (!balances.contains(tx.sender)) balances[tx.sender] = state.balance(tx.sender);
        if (!balances.contains(tx.recipient)) balances[tx.recipient] = state.balance(tx.recipient);
        if (!nonces.contains(tx.sender)) nonces[tx.sender] = state.next_nonce(tx.sender);
        if (tx.nonce != nonces[tx.sender] || tx.value > balances[tx.sender] || tx.cost > state.gas_limit()) continue;
        balances[tx.sender] -= tx.value;
        balances[tx.recipient] += tx.value;
        nonces[tx.sender] += 1;
        out.push_back(tx);
    }
    return out;
}

void Mempool::prune(const ChainState& state) {
    std::vector<Digest> keep;
    for (const auto& id : order_) {
        const auto& tx = by_id_.at(id);
        if (state.find_transaction(id) || tx.nonce < state.next_nonce(tx.sender)) {
            by_id_.erase(id);
            continue;
        }
        keep.push_back(id);
    }
    order_ = std::move(keep);
}

std::vector<Transaction> Mempool::all() const {
    std::vector<Transaction> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(by_id_.at(id));
    return out;
}

}  // namespace tnet::node
