/*
 * types.cpp
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

#include "tnet/node/types.hpp"

#include <algorithm>
#include <bit>

#include "tnet/error.hpp"

namespace tnet::node {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(Errc::MalformedRequest, std::string("missing field ") + key);
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::MalformedRequest, std::string("bad type for field ") + key);
    }
}

Json fields_json(const Transaction& tx) {
    Json j = {{"sender", tx.sender.hex()},
              {"recipient", tx.recipient.hex()},
              {"value", tx.value},
              {"nonce", tx.nonce},
              {"cost", tx.cost}};
    j["payloadHash"] = tx.payload_hash ? Json(tx.payload_hash->hex()) : Json(nullptr);
    return j;
}

}  // namespace

std::string Transaction::canonical_fields() const { return canonical(fields_json(*this)); }

Digest Transaction::compute_id() const { return sha256(canonical_fields()); }

Transaction& Transaction::seal() {
    tx_id = compute_id();
    return *this;
}

Json Transaction::to_json() const {
    Json j = fields_json(*this);
    j["txId"] = tx_id.hex();
    return j;
}

Transaction Transaction::from_json(const Json& j) {
    if (!j.is_object()) throw Error(Errc::MalformedRequest, "transaction must be an object");
    Transaction tx;
    tx.sender = AccountId::from_hex(field<std::string>(j, "sender"));
    tx.recipient = AccountId::from_hex(field<std::string>(j, "recipient"));
    tx.value = field<std::int64_t>(j, "value");
    tx.nonce = field<std::int64_t>(j, "nonce");
    tx.cost = field<std::int64_t>(j, "cost");
    auto ph = j.find("payloadHash");
    if (ph != j.end() && !ph->is_null()) tx.payload_hash = Digest::from_hex(ph->get<std::string>());
    auto id = j.find("txId");
    tx.tx_id = (id != j.end() && id->is_string()) ? Digest::from_hex(id->get<std::string>()) : tx.compute_id();
    return tx;
}

Digest Block::tx_root() const {
    Sha256 h;
    for (const auto& tx : transactions) h.update(tx.tx_id.bytes());
    return h.finish();
}

Digest Block::compute_hash() const {
    Json header = {{"height", height},       {"parentHash", parent_hash.hex()}, {"timestamp", timestamp},
                   {"miner", miner.hex()},   {"powNonce", pow_nonce},          {"txRoot", tx_root().hex()}};
    return sha256(canonical(header));
}

Json Block::to_json() const {
    Json txs = Json::array();
    for (const auto& tx : transactions) txs.push_back(tx.to_json());
    return {{"height", height},         {"parentHash", parent_hash.hex()}, {"timestamp", timestamp},
            {"miner", miner.hex()},     {"powNonce", pow_nonce},          {"transactions", txs},
            {"blockHash", block_hash.hex()}};
}

Block Block::from_json(const Json& j) {
    if (!j.is_object()) throw Error(Errc::MalformedRequest, "block must be an object");
    Block b;
    b.height = field<std::int64_t>(j, "height");
    b.parent_hash = Digest::from_hex(field<std::string>(j, "parentHash"));
    b.timestamp = field<std::int64_t>(j, "timestamp");
    b.miner = AccountId::from_hex(field<std::string>(j, "miner"));
    b.pow_nonce = field<std::uint64_t>(j, "powNonce");
    b.block_hash = Digest::from_hex(field<std::string>(j, "blockHash"));
    auto txs = j.find("transactions");
    if (txs == j.end() || !txs->is_array()) throw Error(Errc::MalformedRequest, "block transactions missing");
    for (const auto& t : *txs) b.transactions.push_back(Transaction::from_json(t));
    return b;
}

Block genesis_block(const genesis::GenesisDocument& doc) {
    Block b;
    b.height = 0;
    b.block_hash = doc.genesis_hash;
    return b;
}

int pow_target(std::int64_t difficulty) {
    if (difficulty < 1) throw Error(Errc::SchemaError, "difficulty must be >= 1");
    // ceil(log2(d)) == bit width of (d - 1).
    int bits = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(difficulty - 1)));
    return std::clamp(bits, 4, 24);
}

std::string_view fault_name(FaultMode mode) {
    switch (mode) {
        case FaultMode::None: return "none";
        case FaultMode::StallMempool: return "stall_mempool";
        case FaultMode::Unresponsive: return "unresponsive";
    }
    return "none";
}

FaultMode parse_fault(std::string_view name) {
    if (name == "none") return FaultMode::None;
    if (name == "stall_mempool") return FaultMode::StallMempool;
    if (name == "unresponsive") return FaultMode::Unresponsive;
    throw Error(Errc::MalformedRequest, "unknown fault mode \"" + std::string(name) + "\"");
}

}  // namespace tnet::node
