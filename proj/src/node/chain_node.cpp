/*
 * chain_node.cpp
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

#include "tnet/node/chain_node.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>

#include "tnet/error.hpp"

namespace tnet::node {

namespace {

using Clock = std::chrono::steady_clock;
constexpr Millis kHandshakeTimeout{2000};
constexpr Millis kRedialPeriod{500};
constexpr std::size_t kSyncBatch = 256;

std::int64_t unix_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Json ok_response(Json result) { return {{"ok", true}, {"result", std::move(result)}}; }

Json error_response(Errc code, const std::string& message) {
    return {{"ok", false}, {"error", {{"code", std::string(errc_name(code))}, {"message", message}}}};
}

const Json& param(const Json& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw Error(Errc::MalformedRequest, std::string("missing param ") + key);
    return *it;
}

}  // namespace

struct ChainNode::PeerSession {
    Socket sock;
    std::mutex write_mu;
    std::string name;
    Endpoint listen;
    bool outbound = false;
    std::thread reader;
    std::atomic<bool> closed{false};
    std::atomic<std::int64_t> remote_height{0};  // best height the peer has announced

    bool send(const Json& msg) {
        std::lock_guard lock(write_mu);
        if (closed) return false;
        try {
            sock.send_frame(canonical(msg));
            return true;
        } catch (const Error&) {
            return false;
        }
    }
};

struct ChainNode::AdminConn {
    Socket sock;
    std::thread thread;
    std::atomic<bool> done{false};
};

NodeOptions NodeOptions::from_manifest(const NodeManifest& m, std::filesystem::path data_dir) {
    NodeOptions o;
    o.name = m.name;
    o.role = m.role;
    o.account = m.account;
    o.data_dir = std::move(data_dir);
    o.blockchain_port = m.blockchain_port;
    o.admin_port = m.admin_port;
    o.advertise_host = m.host;
    o.max_block_txs = m.max_block_txs;
    o.block_interval = m.block_interval;
    return o;
}

ChainNode::ChainNode(NodeOptions options) : options_(std::move(options)), data_dir_(options_.data_dir) {}

ChainNode::~ChainNode() { stop(); }

void ChainNode::start() {
    auto genesis = data_dir_.open(options_.genesis);
    chain_ = std::make_unique<ChainState>(genesis);
    for (const auto& block : data_dir_.load_blocks()) {
        auto r = chain_->apply_block(block);
        if (!r.accepted)
            throw Error(Errc::IoError, "block log replay failed at height " + std::to_string(block.height) + ": " +
                                           r.detail);
    }
    for (const auto& tx : data_dir_.load_mempool()) {
        try {
            if (mempool_.admit(*chain_, tx)) seen_txs_.insert(tx.tx_id);
        } catch (const Error& e) {
            spdlog::warn("[{}] dropping journaled mempool tx {}: {}", options_.name, tx.tx_id.hex(), e.what());
        }
    }
    dial_list_ = data_dir_.load_peers();

    peer_listener_ = Socket::listen(options_.blockchain_port);
    admin_listener_ = Socket::listen(options_.admin_port);
    options_.blockchain_port = peer_listener_.local_port();
    options_.admin_port = admin_listener_.local_port();
    started_ = true;

    spdlog::info("[{}] started at height {} (peer port {}, admin port {})", options_.name, chain_->height(),
                 options_.blockchain_port, options_.admin_port);

    workers_.emplace_back([this] { admin_accept_loop(); });
    workers_.emplace_back([this] { peer_accept_loop(); });
    workers_.emplace_back([this] { redial_loop(); });
    if (options_.role == dsl::Role::Miner) workers_.emplace_back([this] { mine_loop(); });

    // Rejoin persisted peers before reporting ready; the redial loop keeps
    // retrying any that are down.
    std::vector<Endpoint> known;
    {
        std::lock_guard lock(peers_mu_);
        known = dial_list_;
    }
    for (const auto& ep : known) {
        try {
            add_peer(ep);
        } catch (const Error& e) {
            spdlog::info("[{}] peer {} not reachable yet: {}", options_.name, ep.str(), e.what());
        }
    }
}

void ChainNode::request_stop() {
    {
        std::lock_guard lock(stop_mu_);
        stop_requested_ = true;
    }
    stop_cv_.notify_all();
}

void ChainNode::wait() {
    std::unique_lock lock(stop_mu_);
    stop_cv_.wait(lock, [this] { return stop_requested_; });
}

void ChainNode::stop() {
    if (!started_ || stopped_) return;
    stopped_ = true;
    stopping_ = true;
    tip_changed_ = true;
    request_stop();
    admin_listener_.shutdown();
    peer_listener_.shutdown();
    {
        std::lock_guard lock(peers_mu_);
        for (auto& s : all_sessions_) {
            s->closed = true;
            s->sock.shutdown();
        }
    }
    {
        std::lock_guard lock(admin_mu_);
        for (auto& c : admin_conns_) c->sock.shutdown();
    }
    for (auto& w : workers_)
        if (w.joinable()) w.join();
    workers_.clear();
    {
        std::list<std::shared_ptr<AdminConn>> conns;
        {
            std::lock_guard lock(admin_mu_);
            conns.swap(admin_conns_);
        }
        for (auto& c : conns)
            if (c->thread.joinable()) c->thread.join();
    }
    {
        std::list<std::shared_ptr<PeerSession>> sessions;
        {
            std::lock_guard lock(peers_mu_);
            sessions.swap(all_sessions_);
            peers_.clear();
        }
        for (auto& s : sessions) {
            s->closed = true;
            s->sock.shutdown();
            if (s->reader.joinable()) s->reader.join();
        }
    }
    {
        std::lock_guard lock(state_mu_);
        save_mempool_locked();
        data_dir_.close_log();
    }
    admin_listener_.close();
    peer_listener_.close();
    spdlog::info("[{}] stopped", options_.name);
}

std::int64_t ChainNode::height() const {
    std::lock_guard lock(state_mu_);
    return chain_ ? chain_->height() : 0;
}

std::size_t ChainNode::peer_count() const {
    std::lock_guard lock(peers_mu_);
    return peers_.size();
}

FaultMode ChainNode::fault() const {
    std::lock_guard lock(state_mu_);
    return fault_;
}

std::vector<Block> ChainNode::blocks() const {
    std::lock_guard lock(state_mu_);
    return chain_->blocks();
}

std::map<std::string, std::int64_t> ChainNode::reject_counts() const {
    std::lock_guard lock(state_mu_);
    return rejects_;
}

void ChainNode::save_mempool_locked() {
    try {
        data_dir_.save_mempool(mempool_.all());
    } catch (const Error& e) {
        spdlog::error("[{}] saving mempool: {}", options_.name, e.what());
    }
}

void ChainNode::commit_block_locked(const Block& block) {
    data_dir_.append_block(block);
    mempool_.prune(*chain_);
    save_mempool_locked();
    tip_changed_ = true;
}

std::vector<std::shared_ptr<ChainNode::PeerSession>> ChainNode::sessions() const {
    std::lock_guard lock(peers_mu_);
    std::vector<std::shared_ptr<PeerSession>> out;
    for (const auto& [_, s] : peers_) out.push_back(s);
    return out;
}

void ChainNode::broadcast(const Json& msg, const PeerSession* except) {
    for (const auto& s : sessions())
        if (s.get() != except) s->send(msg);
}

// ---------------------------------------------------------------------------
// Admin protocol

void ChainNode::admin_accept_loop() {
    while (!stopping_) {
        Socket sock = admin_listener_.accept();
        if (!sock.valid()) break;
        std::lock_guard lock(admin_mu_);
        if (stopping_) break;
        for (auto it = admin_conns_.begin(); it != admin_conns_.end();) {
            if ((*it)->done) {
                if ((*it)->thread.joinable()) (*it)->thread.join();
                it = admin_conns_.erase(it);
            } else {
                ++it;
            }
        }
        auto conn = std::make_shared<AdminConn>();
        conn->sock = std::move(sock);
        admin_conns_.push_back(conn);
        conn->thread = std::thread([this, conn] { serve_admin(conn); });
    }
}

void ChainNode::serve_admin(std::shared_ptr<AdminConn> conn) {
    try {
        while (!stopping_) {
            auto line = conn->sock.read_line();
            if (!line) break;
            if (line->empty()) continue;
            if (fault() == FaultMode::Unresponsive) continue;  // hung: never answer

            Json request;
            Json response;
            bool stop_after = false;
            try {
                request = Json::parse(*line);
            } catch (const nlohmann::json::exception&) {
                conn->sock.send_all(canonical(error_response(Errc::MalformedRequest, "request is not JSON")) + "\n");
                continue;
            }
            response = handle_admin(request);
            stop_after = response.value("ok", false) && request.value("op", "") == "stop";
            conn->sock.send_all(canonical(response) + "\n");
            if (stop_after) {
                request_stop();
                break;
            }
        }
    } catch (const Error&) {
    }
    conn->done = true;
}

Json ChainNode::handle_admin(const Json& request) {
    try {
        if (!request.is_object() || !request.contains("op") || !request["op"].is_string())
            throw Error(Errc::MalformedRequest, "request needs a string \"op\"");
        Json params = request.value("params", Json::object());
        if (params.is_null()) params = Json::object();
        return ok_response(dispatch_admin(request["op"].get<std::string>(), params));
    } catch (const Error& e) {
        return error_response(e.code(), e.detail());
    } catch (const nlohmann::json::exception& e) {
        return error_response(Errc::MalformedRequest, e.what());
    }
}

Json ChainNode::status_json() const {
    Json peer_names = Json::array();
    std::size_t peers = 0;
    std::int64_t peer_height = 0;
    {
        std::lock_guard lock(peers_mu_);
        for (const auto& [name, s] : peers_) {
            peer_names.push_back(name);
            peer_height = std::max<std::int64_t>(peer_height, s->remote_height);
        }
        peers = peers_.size();
    }
    std::lock_guard lock(state_mu_);
    return {{"name", options_.name},
            {"role", std::string(dsl::role_name(options_.role))},
            {"account", options_.account.hex()},
            {"height", chain_->height()},
            {"tipHash", chain_->tip().block_hash.hex()},
            {"genesisHash", chain_->genesis().genesis_hash.hex()},
            {"peers", peers},
            {"peerNames", peer_names},
            {"peerHeight", peer_height},
            {"pending", mempool_.size()},
            {"fault", std::string(fault_name(fault_))}};
}

Json ChainNode::dispatch_admin(const std::string& op, const Json& params) {
    if (op == "status") return status_json();
    if (op == "block_number") return height();
    if (op == "pending_count") {
        std::lock_guard lock(state_mu_);
        return mempool_.size();
    }
    if (op == "get_balance" || op == "get_nonce") {
        auto account = AccountId::from_hex(param(params, "account").get<std::string>());
        std::lock_guard lock(state_mu_);
        if (op == "get_balance") return chain_->balance(account);
        return mempool_.pending_nonce(*chain_, account);
    }
    if (op == "get_transaction") {
        auto id = Digest::from_hex(param(params, "txId").get<std::string>());
        std::lock_guard lock(state_mu_);
        if (auto h = chain_->find_transaction(id))
            return {{"status", "mined"}, {"height", *h}, {"transaction", chain_->transaction(id)->to_json()}};
        if (const auto* tx = mempool_.find(id)) return {{"status", "pending"}, {"transaction", tx->to_json()}};
        return {{"status", "unknown"}};
    }
    if (op == "get_block") {
        auto h = param(params, "height").get<std::int64_t>();
        std::lock_guard lock(state_mu_);
        if (h < 0 || h > chain_->height()) throw Error(Errc::NotFound, "no block at height " + std::to_string(h));
        return chain_->blocks()[static_cast<std::size_t>(h)].to_json();
    }
    if (op == "submit_transaction") {
        auto tx = Transaction::from_json(param(params, "tx"));
        bool fresh = false;
        std::int64_t h = 0;
        bool relay = false;
        {
            std::lock_guard lock(state_mu_);
            fresh = mempool_.admit(*chain_, tx);
            h = chain_->height();
            if (fresh) {
                seen_txs_.insert(tx.tx_id);
                save_mempool_locked();
            }
            // A resubmitted pending tx is relayed again.
            relay = mempool_.contains(tx.tx_id) && fault_ != FaultMode::StallMempool;
        }
        if (relay) broadcast({{"type", "new_tx"}, {"tx", tx.to_json()}}, nullptr);
        return {{"txId", tx.tx_id.hex()}, {"height", h}, {"duplicate", !fresh}};
    }
    if (op == "add_peer") {
        add_peer(Endpoint::parse(param(params, "endpoint").get<std::string>()));
        return {{"peers", peer_count()}};
    }
    if (op == "get_peers") {
        Json out = Json::array();
        for (const auto& s : sessions()) out.push_back({{"name", s->name}, {"endpoint", s->listen.str()}});
        return out;
    }
    if (op == "set_fault") {
        auto mode = parse_fault(param(params, "mode").get<std::string>());
        std::lock_guard lock(state_mu_);
        fault_ = mode;
        spdlog::warn("[{}] fault mode set to {}", options_.name, fault_name(mode));
        return {{"fault", std::string(fault_name(mode))}};
    }
    if (op == "stop") return {{"stopping", true}};
    throw Error(Errc::MalformedRequest, "unknown op \"" + op + "\"");
}

// ---------------------------------------------------------------------------
// Peer protocol

Json ChainNode::hello_json() const {
    std::lock_guard lock(state_mu_);
    return {{"type", "hello"},
            {"name", options_.name},
            {"genesisHash", chain_->genesis().genesis_hash.hex()},
            {"listen", Endpoint{options_.advertise_host, options_.blockchain_port}.str()},
            {"height", chain_->height()}};
}

bool ChainNode::register_session(const std::shared_ptr<PeerSession>& session) {
    std::lock_guard lock(peers_mu_);
    if (stopping_) return false;
    auto it = peers_.find(session->name);
    if (it != peers_.end() && !it->second->closed) return false;
    peers_[session->name] = session;
    return true;
}

void ChainNode::add_peer(const Endpoint& ep) {
    {
        std::lock_guard lock(peers_mu_);
        for (const auto& [_, s] : peers_)
            if (s->listen == ep && !s->closed) return;
    }
    auto session = std::make_shared<PeerSession>();
    session->sock = Socket::connect(ep, kHandshakeTimeout);
    session->outbound = true;
    session->listen = ep;
    session->sock.send_frame(canonical(hello_json()));
    std::optional<std::string> frame;
    try {
        frame = session->sock.read_frame(kHandshakeTimeout);
    } catch (const Error& e) {
        if (e.code() == Errc::Timeout) throw Error(Errc::NodeUnresponsive, "peer " + ep.str() + " did not answer hello");
        throw;
    }
    if (!frame) throw Error(Errc::ConnectionRefused, "peer " + ep.str() + " closed during handshake");
    Json hello = parse_json(*frame);
    if (hello.value("type", "") != "hello") throw Error(Errc::MalformedRequest, "expected hello from " + ep.str());
    std::string their_genesis = hello.value("genesisHash", "");
    {
        std::lock_guard lock(state_mu_);
        if (their_genesis != chain_->genesis().genesis_hash.hex())
            throw Error(Errc::GenesisMismatch, "peer " + ep.str() + " runs a different genesis");
    }
    session->name = hello.value("name", ep.str());
    if (session->name == options_.name) throw Error(Errc::MalformedRequest, "refusing to peer with self");

    {
        std::lock_guard lock(peers_mu_);
        if (std::find(dial_list_.begin(), dial_list_.end(), ep) == dial_list_.end()) {
            dial_list_.push_back(ep);
            data_dir_.save_peers(dial_list_);
        }
    }
    {
        std::lock_guard lock(peers_mu_);
        if (stopping_) return;
        auto it = peers_.find(session->name);
        if (it != peers_.end() && !it->second->closed) return;  // already connected under that name
        peers_[session->name] = session;
        all_sessions_.push_back(session);
        session->reader = std::thread([this, session] { peer_read_loop(session, true); });
    }
    spdlog::info("[{}] peered with {} at {}", options_.name, session->name, ep.str());
    on_session_ready(session, hello.value("height", std::int64_t{0}));
}

void ChainNode::peer_accept_loop() {
    while (!stopping_) {
        Socket sock = peer_listener_.accept();
        if (!sock.valid()) break;
        auto session = std::make_shared<PeerSession>();
        session->sock = std::move(sock);
        std::lock_guard lock(peers_mu_);
        if (stopping_) break;
        all_sessions_.push_back(session);
        session->reader = std::thread([this, session] { peer_read_loop(session, false); });
    }
}

void ChainNode::on_session_ready(const std::shared_ptr<PeerSession>& session, std::int64_t remote_height) {
    session->remote_height = remote_height;
    std::vector<Transaction> pending;
    std::int64_t ours = 0;
    {
        std::lock_guard lock(state_mu_);
        if (fault_ != FaultMode::StallMempool) pending = mempool_.all();
        ours = chain_->height();
    }
    for (const auto& tx : pending) session->send({{"type", "new_tx"}, {"tx", tx.to_json()}});
    if (remote_height > ours) session->send({{"type", "get_blocks"}, {"from", ours + 1}});
}

void ChainNode::peer_read_loop(std::shared_ptr<PeerSession> session, bool hello_done) {
    try {
        if (!hello_done) {
            auto frame = session->sock.read_frame(kHandshakeTimeout);
            if (!frame) throw Error(Errc::IoError, "closed before hello");
            while (fault() == FaultMode::Unresponsive && !stopping_)
                std::this_thread::sleep_for(Millis(50));  // hung: never answer
            Json hello = parse_json(*frame);
            std::string genesis_hash;
            {
                std::lock_guard lock(state_mu_);
                genesis_hash = chain_->genesis().genesis_hash.hex();
            }
            if (hello.value("type", "") != "hello") throw Error(Errc::MalformedRequest, "expected hello");
            if (hello.value("genesisHash", "") != genesis_hash) {
                session->send(hello_json());  // lets the dialer report the mismatch
                throw Error(Errc::GenesisMismatch, "peer runs a different genesis");
            }
            session->name = hello.value("name", "");
            session->listen = Endpoint::parse(hello.value("listen", "unknown:0"));
            session->send(hello_json());
            if (!register_session(session)) throw Error(Errc::AlreadyExists, "duplicate session");
            spdlog::info("[{}] accepted peer {}", options_.name, session->name);
            on_session_ready(session, hello.value("height", std::int64_t{0}));
        }
        while (!stopping_) {
            auto frame = session->sock.read_frame();
            if (!frame) break;
            if (fault() == FaultMode::Unresponsive) continue;
            Json msg;
            try {
                msg = Json::parse(*frame);
            } catch (const nlohmann::json::exception&) {
                continue;
            }
            handle_peer_message(session, msg);
        }
    } catch (const std::exception& e) {
        if (!stopping_) spdlog::debug("[{}] peer session ended: {}", options_.name, e.what());
    }
    session->closed = true;
    session->sock.shutdown();
    std::lock_guard lock(peers_mu_);
    auto it = peers_.find(session->name);
    if (it != peers_.end() && it->second == session) peers_.erase(it);
}

std::vector<Block> ChainNode::ingest_blocks(const std::vector<Block>& blocks, std::int64_t* want_from) {
    std::vector<Block> accepted;
    std::lock_guard lock(state_mu_);
    for (const auto& block : blocks) {
        if (block.height <= chain_->height()) continue;  // already have it
        auto r = chain_->apply_block(block);
        if (r.accepted) {
            commit_block_locked(block);
            accepted.push_back(block);
            continue;
        }
        if (r.reason == RejectReason::BadParent && block.height > chain_->height() + 1) {
            if (want_from) *want_from = chain_->height() + 1;
        } else {
            ++rejects_[std::string(reject_name(r.reason))];
            spdlog::warn("[{}] rejected block {}: {} {}", options_.name, block.height, reject_name(r.reason),
                         r.detail);
        }
        break;
    }
    return accepted;
}

ApplyResult ChainNode::receive_block(const Block& block) {
    {
        std::lock_guard lock(state_mu_);
        if (block.height >= 0 && block.height <= chain_->height() &&
            chain_->blocks()[static_cast<std::size_t>(block.height)].block_hash == block.block_hash)
            return {true, RejectReason::BadTx, "duplicate"};
        auto r = chain_->apply_block(block);
        if (!r.accepted) {
            ++rejects_[std::string(reject_name(r.reason))];
            return r;
        }
        commit_block_locked(block);
    }
    broadcast({{"type", "new_block"}, {"block", block.to_json()}}, nullptr);
    return ApplyResult::ok();
}

void ChainNode::handle_peer_message(const std::shared_ptr<PeerSession>& session, const Json& msg) {
    auto type = msg.value("type", "");
    auto saw_height = [&](std::int64_t h) {
        if (h > session->remote_height) session->remote_height = h;
    };
    if (type == "new_block") {
        Block block = Block::from_json(msg.at("block"));
        saw_height(block.height);
        std::int64_t want_from = -1;
        auto accepted = ingest_blocks({block}, &want_from);
        for (const auto& b : accepted) broadcast({{"type", "new_block"}, {"block", b.to_json()}}, session.get());
        if (want_from >= 0) session->send({{"type", "get_blocks"}, {"from", want_from}});
    } else if (type == "get_blocks") {
        auto from = msg.value("from", std::int64_t{1});
        Json list = Json::array();
        std::int64_t tip = 0;
        {
            std::lock_guard lock(state_mu_);
            tip = chain_->height();
            for (auto h = std::max<std::int64_t>(from, 1); h <= tip && list.size() < kSyncBatch; ++h)
                list.push_back(chain_->blocks()[static_cast<std::size_t>(h)].to_json());
        }
        session->send({{"type", "blocks"}, {"blocks", list}, {"tip", tip}});
    } else if (type == "blocks") {
        std::vector<Block> blocks;
        for (const auto& b : msg.at("blocks")) blocks.push_back(Block::from_json(b));
        std::int64_t want_from = -1;
        auto accepted = ingest_blocks(blocks, &want_from);
        for (const auto& b : accepted) broadcast({{"type", "new_block"}, {"block", b.to_json()}}, session.get());
        auto their_tip = msg.value("tip", std::int64_t{0});
        saw_height(their_tip);
        if (height() < their_tip && !accepted.empty()) session->send({{"type", "get_blocks"}, {"from", height() + 1}});
    } else if (type == "get_tip") {
        std::lock_guard lock(state_mu_);
        Json reply = {{"type", "tip"}, {"height", chain_->height()}, {"hash", chain_->tip().block_hash.hex()}};
        session->send(reply);
    } else if (type == "tip") {
        saw_height(msg.value("height", std::int64_t{0}));
        if (msg.value("height", std::int64_t{0}) > height()) session->send({{"type", "get_blocks"}, {"from", height() + 1}});
    } else if (type == "new_tx") {
        Transaction tx = Transaction::from_json(msg.at("tx"));
        bool relay = false;
        {
            std::lock_guard lock(state_mu_);
            if (seen_txs_.contains(tx.tx_id)) return;
            try {
                if (mempool_.admit(*chain_, tx)) {
                    seen_txs_.insert(tx.tx_id);
                    save_mempool_locked();
                    relay = fault_ != FaultMode::StallMempool;
                }
            } catch (const Error& e) {
                spdlog::debug("[{}] dropped relayed tx {}: {}", options_.name, tx.tx_id.hex(), e.what());
            }
        }
        if (relay) broadcast(msg, session.get());
    }
}

void ChainNode::redial_loop() {
    while (!stopping_) {
        {
            std::unique_lock lock(stop_mu_);
            stop_cv_.wait_for(lock, kRedialPeriod, [this] { return stop_requested_; });
        }
        if (stopping_ || fault() == FaultMode::Unresponsive) continue;
        std::vector<Endpoint> targets;
        {
            std::lock_guard lock(peers_mu_);
            for (const auto& ep : dial_list_) {
                bool connected = std::any_of(peers_.begin(), peers_.end(),
                                             [&](const auto& kv) { return kv.second->listen == ep && !kv.second->closed; });
                if (!connected) targets.push_back(ep);
            }
        }
        for (const auto& ep : targets) {
            try {
                add_peer(ep);
            } catch (const Error& e) {
                spdlog::debug("[{}] redial {} failed: {}", options_.name, ep.str(), e.what());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Mining

void ChainNode::mine_loop() {
    auto next_at = Clock::now();
    while (!stopping_) {
        while (!stopping_ && Clock::now() < next_at) {
            auto left = std::min<Clock::duration>(next_at - Clock::now(), Millis(20));
            std::this_thread::sleep_for(left);
        }
        if (stopping_) break;

        Block candidate;
        int bits = 0;
        {
            std::lock_guard lock(state_mu_);
            if (fault_ == FaultMode::Unresponsive) {
                next_at = Clock::now() + Millis(50);
                continue;
            }
            candidate.height = chain_->height() + 1;
            candidate.parent_hash = chain_->tip().block_hash;
            candidate.timestamp = unix_seconds();
            candidate.miner = options_.account;
            if (fault_ != FaultMode::StallMempool) candidate.transactions = mempool_.select(*chain_, options_.max_block_txs);
            bits = chain_->target_bits();
            tip_changed_ = false;
        }
        auto solved = solve_pow(std::move(candidate), bits, tip_changed_);
        if (!solved) continue;
        {
            std::lock_guard lock(state_mu_);
            if (chain_->tip().block_hash != solved->parent_hash) continue;
            auto r = chain_->apply_block(*solved);
            if (!r.accepted) {
                spdlog::error("[{}] own block rejected: {}", options_.name, r.detail);
                continue;
            }
            commit_block_locked(*solved);
        }
        broadcast({{"type", "new_block"}, {"block", solved->to_json()}}, nullptr);
        next_at = Clock::now() + options_.block_interval;
    }
}

}  // namespace tnet::node
