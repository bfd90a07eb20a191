/*
 * chain_node.hpp
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
#include <condition_variable>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "tnet/dsl/config.hpp"
#include "tnet/net.hpp"
#include "tnet/node/chain_state.hpp"
#include "tnet/node/data_dir.hpp"

namespace tnet::node {

struct NodeOptions {
    std::string name;
    dsl::Role role = dsl::Role::Prosumer;
    AccountId account;
    std::filesystem::path data_dir;
    std::uint16_t blockchain_port = 0;
    std::uint16_t admin_port = 0;
    /// Host other nodes should dial to reach this one.
    std::string advertise_host = "127.0.0.1";
    std::size_t max_block_txs = 64;
    /// Minimum spacing between locally mined blocks.
    std::chrono::milliseconds block_interval{200};
    /// If unset, data_dir/genesis.json is used.
    std::optional<genesis::GenesisDocument> genesis;

    static NodeOptions from_manifest(const NodeManifest& m, std::filesystem::path data_dir);
};

/// Simulated chain node: ledger + mempool, optional miner, a peer protocol
/// on blockchain_port and a newline-delimited JSON admin protocol on
/// admin_port.
///
/// Threads: one admin acceptor plus a handler per admin connection, one
/// peer acceptor plus a reader per peer session, a redial loop and (miners
/// only) a mining loop. ChainState, the mempool and the fault mode are
/// guarded by state_mu_; network writes happen after it is released.
class ChainNode {
public:
    explicit ChainNode(NodeOptions options);
    ~ChainNode();
    ChainNode(const ChainNode&) = delete;
    ChainNode& operator=(const ChainNode&) = delete;

    /// Loads the data directory, replays the block log, binds both ports and
    /// launches worker threads. Throws PortInUse, GenesisMismatch,
    /// MissingGenesis.
    void start();
    /// Asks the node to shut down; returns immediately.
    void request_stop();
    /// Blocks until request_stop() (e.g. the admin "stop" op).
    void wait();
    /// Persists state, closes every socket and joins all threads.
    void stop();

    /// Handles one admin request object; used by the admin server and by
    /// in-process callers.
    Json handle_admin(const Json& request);

    /// Delivers a block as if it came from a peer; accepted blocks are
    /// forwarded to every session. A block already on the chain is a no-op
    /// reported as accepted with detail "duplicate".
    ApplyResult receive_block(const Block& block);

    /// Outcome counters for received blocks, keyed by reject reason name.
    std::map<std::string, std::int64_t> reject_counts() const;

    std::int64_t height() const;
    std::size_t peer_count() const;
    FaultMode fault() const;
    const NodeOptions& options() const { return options_; }
    std::vector<Block> blocks() const;

private:
    struct PeerSession;
    struct AdminConn;

    // admin
    void admin_accept_loop();
    void serve_admin(std::shared_ptr<AdminConn> conn);
    Json dispatch_admin(const std::string& op, const Json& params);
    Json status_json() const;

    // peers
    void peer_accept_loop();
    void peer_read_loop(std::shared_ptr<PeerSession> session, bool hello_done);
    void add_peer(const Endpoint& ep);
    bool register_session(const std::shared_ptr<PeerSession>& session);
    void on_session_ready(const std::shared_ptr<PeerSession>& session, std::int64_t remote_height);
    void handle_peer_message(const std::shared_ptr<PeerSession>& session, const Json& msg);
    /// Applies blocks in order; returns those accepted.
    std::vector<Block> ingest_blocks(const std::vector<Block>& blocks, std::int64_t* want_from);
    void broadcast(const Json& msg, const PeerSession* except);
    Json hello_json() const;
    void redial_loop();

    // mining
    void mine_loop();
    void commit_block_locked(const Block& block);

    void save_mempool_locked();
    std::vector<std::shared_ptr<PeerSession>> sessions() const;

    NodeOptions options_;
    DataDir data_dir_;

    mutable std::mutex state_mu_;
    std::unique_ptr<ChainState> chain_;
    Mempool mempool_;
    FaultMode fault_ = FaultMode::None;
    std::unordered_set<Digest> seen_txs_;
    std::map<std::string, std::int64_t> rejects_;

    mutable std::mutex peers_mu_;
    std::map<std::string, std::shared_ptr<PeerSession>> peers_;
    std::vector<Endpoint> dial_list_;
    std::list<std::shared_ptr<PeerSession>> all_sessions_;

    std::mutex admin_mu_;
    std::list<std::shared_ptr<AdminConn>> admin_conns_;

    Socket admin_listener_;
    Socket peer_listener_;
    std::vector<std::thread> workers_;

    std::atomic<bool> stopping_{false};
    std::atomic<bool> tip_changed_{false};
    std::mutex stop_mu_;
    std::condition_variable stop_cv_;
    bool stop_requested_ = false;
    bool started_ = false;
    bool stopped_ = false;
};

}  // namespace tnet::node
