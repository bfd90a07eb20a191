/*
 * data_dir.cpp
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

#include "tnet/node/data_dir.hpp"

#include <sstream>

#include "tnet/error.hpp"

namespace tnet::node {

namespace fs = std::filesystem;

Json NodeManifest::to_json() const {
    Json j = {{"name", name},
              {"role", std::string(dsl::role_name(role))},
              {"account", account.hex()},
              {"host", host},
              {"blockchainPort", blockchain_port},
              {"adminPort", admin_port},
              {"maxBlockTxs", max_block_txs},
              {"blockIntervalMs", block_interval.count()}};
    if (wrapper_port) j["wrapperPort"] = *wrapper_port;
    return j;
}

NodeManifest NodeManifest::from_json(const Json& j) {
    try {
        NodeManifest m;
        m.name = j.at("name").get<std::string>();
        auto role = j.at("role").get<std::string>();
        m.role = role == "miner" ? dsl::Role::Miner : role == "dso" ? dsl::Role::Dso : dsl::Role::Prosumer;
        m.account = AccountId::from_hex(j.at("account").get<std::string>());
        m.host = j.value("host", std::string("127.0.0.1"));
        m.blockchain_port = j.at("blockchainPort").get<std::uint16_t>();
        m.admin_port = j.at("adminPort").get<std::uint16_t>();
        if (j.contains("wrapperPort")) m.wrapper_port = j.at("wrapperPort").get<std::uint16_t>();
        m.max_block_txs = j.value("maxBlockTxs", std::size_t{64});
        m.block_interval = std::chrono::milliseconds(j.value("blockIntervalMs", std::int64_t{200}));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaError, std::string("node manifest: ") + e.what());
    }
}

genesis::GenesisDocument DataDir::open(const std::optional<genesis::GenesisDocument>& supplied) {
    fs::create_directories(root_);
    std::optional<Digest> stored;
    if (fs::exists(chainstore_path())) {
        auto j = parse_json(read_file(chainstore_path()));
        stored = Digest::from_hex(j.at("genesisHash").get<std::string>());
    }

    genesis::GenesisDocument doc;
    if (supplied) {
        doc = *supplied;
        if (fs::exists(genesis_path())) {
            auto existing = genesis::read_genesis(genesis_path());
            if (existing.genesis_hash != doc.genesis_hash)
                throw Error(Errc::GenesisMismatch, "data directory " + root_.string() + " holds genesis " +
                                                       existing.genesis_hash.hex() + ", supplied " +
                                                       doc.genesis_hash.hex());
        } else {
            genesis::write_genesis(doc, genesis_path());
        }
    } else {
        if (!fs::exists(genesis_path()))
            throw Error(Errc::MissingGenesis, "no genesis.json in " + root_.string());
        doc = genesis::read_genesis(genesis_path());
    }

    if (stored && *stored != doc.genesis_hash)
        throw Error(Errc::GenesisMismatch, "chain store in " + root_.string() + " was initialized for genesis " +
                                               stored->hex());
    if (!stored) write_file_atomic(chainstore_path(), canonical(Json{{"genesisHash", doc.genesis_hash.hex()}}) + "\n");
    return doc;
}

std::vector<Block> DataDir::load_blocks() const {
    std::vector<Block> out;
    std::ifstream in(blocks_path());
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(Block::from_json(Json::parse(line)));
        } catch (const std::exception&) {
            if (in.peek() == std::char_traits<char>::eof()) break;  // torn tail
            throw Error(Errc::IoError, "corrupt block log " + blocks_path().string());
        }
    }
    return out;
}

void DataDir::append_block(const Block& block) {
    if (!blocks_out_.is_open()) {
        blocks_out_.open(blocks_path(), std::ios::app | std::ios::binary);
        if (!blocks_out_) throw Error(Errc::IoError, "cannot open " + blocks_path().string());
    }
    blocks_out_ << canonical(block.to_json()) << '\n';
    blocks_out_.flush();
}

std::vector<Transaction> DataDir::load_mempool() const {
    std::vector<Transaction> out;
    if (!fs::exists(mempool_path())) return out;
    auto j = parse_json(read_file(mempool_path()));
    for (const auto& t : j) out.push_back(Transaction::from_json(t));
    return out;
}

void DataDir::save_mempool(const std::vector<Transaction>& txs) const {
    Json arr = Json::array();
    for (const auto& tx : txs) arr.push_back(tx.to_json());
    write_file_atomic(mempool_path(), canonical(arr) + "\n");
}

std::vector<Endpoint> DataDir::load_peers() const {
    std::vector<Endpoint> out;
    if (!fs::exists(peers_path())) return out;
    for (const auto& p : parse_json(read_file(peers_path()))) out.push_back(Endpoint::parse(p.get<std::string>()));
    return out;
}

void DataDir::save_peers(const std::vector<Endpoint>& peers) const {
    Json arr = Json::array();
    for (const auto& p : peers) arr.push_back(p.str());
    write_file_atomic(peers_path(), canonical(arr) + "\n");
}

NodeManifest DataDir::load_manifest() const {
    if (!fs::exists(manifest_path())) throw Error(Errc::NotCreated, "no node.json in " + root_.string());
    return NodeManifest::from_json(parse_json(read_file(manifest_path())));
}

void DataDir::save_manifest(const NodeManifest& manifest) const {
    write_file_atomic(manifest_path(), canonical(manifest.to_json()) + "\n");
}

}  // namespace tnet::node
