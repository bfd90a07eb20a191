/*
 * data_dir.hpp
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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tnet/dsl/config.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/net.hpp"
#include "tnet/node/types.hpp"

namespace tnet::node {

/// Per-node settings written into the data directory by the manager, so a
/// node process can be (re)started from its directory alone.
struct NodeManifest {
    std::string name;
    dsl::Role role = dsl::Role::Prosumer;
    AccountId account;
    std::string host = "127.0.0.1";
    std::uint16_t blockchain_port = 0;
    std::uint16_t admin_port = 0;
    std::optional<std::uint16_t> wrapper_port;
    std::size_t max_block_txs = 64;
    std::chrono::milliseconds block_interval{200};

    Json to_json() const;
    static NodeManifest from_json(const Json& j);
};

/// Files inside one node's data directory.
class DataDir {
public:
    explicit DataDir(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path genesis_path() const { return root_ / "genesis.json"; }
    std::filesystem::path chainstore_path() const { return root_ / "chainstore.json"; }
    std::filesystem::path blocks_path() const { return root_ / "blocks.log"; }
    std::filesystem::path mempool_path() const { return root_ / "mempool.json"; }
    std::filesystem::path peers_path() const { return root_ / "peers.json"; }
    std::filesystem::path manifest_path() const { return root_ / "node.json"; }
    std::filesystem::path pid_path() const { return root_ / "node.pid"; }
    std::filesystem::path log_path() const { return root_ / "node.log"; }
    std::filesystem::path journal_path() const { return root_ / "wrapper-journal.log"; }

    /// Resolves the genesis to run with. With `supplied`, an existing
    /// genesis.json/chainstore.json must carry the same hash
    /// (Error(GenesisMismatch)); otherwise it is written. Without it the
    /// directory's genesis.json is used (Error(MissingGenesis) if absent).
    genesis::GenesisDocument open(const std::optional<genesis::GenesisDocument>& supplied);

    /// Canonical-JSON blocks, one per line, heights 1..n. A torn final line
    /// (crash mid-append) is ignored.
    std::vector<Block> load_blocks() const;
    void append_block(const Block& block);

    std::vector<Transaction> load_mempool() const;
    void save_mempool(const std::vector<Transaction>& txs) const;

    std::vector<Endpoint> load_peers() const;
    void save_peers(const std::vector<Endpoint>& peers) const;

    NodeManifest load_manifest() const;
    void save_manifest(const NodeManifest& manifest) const;

    void close_log() { blocks_out_.close(); }

private:
    std::filesystem::path root_;
    std::ofstream blocks_out_;
};

}  // namespace tnet::node
