/*
 * genesis.cpp
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

#include "tnet/genesis/genesis.hpp"

#include "tnet/error.hpp"
#include "tnet/json.hpp"

namespace tnet::genesis {

namespace {

Json body_json(const GenesisDocument& doc) {
    Json alloc = Json::object();
    for (const auto& [account, balance] : doc.allocations) alloc[account.hex()] = balance;
    return {{"alloc", alloc}, {"chainId", doc.chain_id}, {"difficulty", doc.difficulty}, {"gasLimit", doc.gas_limit}};
}

std::int64_t positive_field(const Json& j, const char* key, std::int64_t min) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer())
        throw Error(Errc::SchemaError, std::string("genesis field ") + key + " missing or not an integer");
    auto v = it->get<std::int64_t>();
    if (v < min) throw Error(Errc::SchemaError, std::string("genesis field ") + key + " out of range");
    return v;
}

}  // namespace

AccountId derive_account(std::string_view configuration_name, std::string_view node_name) {
    static constexpr char kSep = '\0';
    Sha256 h;
    h.update(kAccountDomain).update(std::string_view(&kSep, 1));
    h.update(configuration_name).update(std::string_view(&kSep, 1));
    h.update(node_name);
    return AccountId(h.finish());
}

std::int64_t GenesisDocument::total_supply() const {
    std::int64_t sum = 0;
    for (const auto& [_, b] : allocations) sum += b;
    return sum;
}

std::string canonical_body(const GenesisDocument& doc) { return canonical(body_json(doc)); }

std::string canonical_file(const GenesisDocument& doc) {
    Json j = body_json(doc);
    j["genesisHash"] = doc.genesis_hash.hex();
    return canonical(j);
}

Digest compute_genesis_hash(const GenesisDocument& doc) { return sha256(canonical_body(doc)); }

GenesisDocument make_genesis(const dsl::NetworkConfig& config) {
    auto report = dsl::validate(config);
    if (!report.deployable())
        throw Error(Errc::InvalidConfig, "configuration has " + std::to_string(report.errors.size()) +
                                             " validation error(s), first: " + report.errors.front().message);
    GenesisDocument doc;
    doc.chain_id = config.genesis.chain_id;
    doc.difficulty = config.genesis.difficulty;
    doc.gas_limit = config.genesis.gas_limit;
    for (const auto* node : config.all_nodes())
        doc.allocations[derive_account(config.configuration_name, node->name)] = config.genesis.balance;
    doc.genesis_hash = compute_genesis_hash(doc);
    return doc;
}

GenesisDocument parse_genesis(std::string_view text) {
    if (text.empty()) throw Error(Errc::IoError, "genesis file is empty");
    Json j = parse_json(text);
    if (!j.is_object()) throw Error(Errc::SchemaError, "genesis must be a JSON object");
    GenesisDocument doc;
    doc.chain_id = positive_field(j, "chainId", 1);
    doc.difficulty = positive_field(j, "difficulty", 1);
    doc.gas_limit = positive_field(j, "gasLimit", 1);
    auto alloc = j.find("alloc");
    if (alloc == j.end() || !alloc->is_object()) throw Error(Errc::SchemaError, "genesis alloc missing");
    for (const auto& [hex, balance] : alloc->items()) {
        if (!balance.is_number_integer() || balance.get<std::int64_t>() < 0)
            throw Error(Errc::SchemaError, "genesis balance for " + hex + " must be a non-negative integer");
        doc.allocations[AccountId::from_hex(hex)] = balance.get<std::int64_t>();
    }
    auto hash = j.find("genesisHash");
    if (hash == j.end() || !hash->is_string()) throw Error(Errc::SchemaError, "genesisHash missing");
    doc.genesis_hash = Digest::from_hex(hash->get<std::string>());
    if (j.size() != 5) throw Error(Errc::SchemaError, "genesis has unexpected keys");

    auto recomputed = compute_genesis_hash(doc);
    if (recomputed != doc.genesis_hash)
        throw Error(Errc::HashMismatch, "genesis content hashes to " + recomputed.hex() + ", file claims " +
                                            doc.genesis_hash.hex());
    // A flipped byte that still parses and re-serializes differently (e.g.
    // whitespace) is not canonical either.
    if (canonical_file(doc) != text && canonical_file(doc) + "\n" != text)
        throw Error(Errc::HashMismatch, "genesis file is not in canonical form");
    return doc;
}

void write_genesis(const GenesisDocument& doc, const std::filesystem::path& path) {
    write_file_atomic(path, canonical_file(doc) + "\n");
}

GenesisDocument read_genesis(const std::filesystem::path& path) { return parse_genesis(read_file(path)); }

}  // namespace tnet::genesis
