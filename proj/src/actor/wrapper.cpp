/*
 * wrapper.cpp
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

#include "tnet/actor/wrapper.hpp"

#include <spdlog/spdlog.h>

#include <random>

#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/node/control.hpp"

namespace tnet::actor {

using node::TxStatus;

namespace {

bool is_unreachable(Errc code) {
    return code == Errc::Timeout || code == Errc::ConnectionRefused || code == Errc::NodeUnresponsive ||
           code == Errc::IoError;
}

std::string session_salt() {
    std::random_device rd;
    return std::to_string(rd()) + "." + std::to_string(rd());
}

}  // namespace

std::unique_ptr<Wrapper> Wrapper::attach(WrapperOptions options) {
    if (!options.launch) {
        options.launch = [dir = options.data_dir] { node::launch_local(node::default_node_binary(), dir); };
    }
    if (!options.kill) {
        options.kill = [dir = options.data_dir] { node::kill_from_pidfile(dir); };
    }
    std::unique_ptr<Wrapper> w(new Wrapper(std::move(options)));
    w->monitor_ = std::thread([raw = w.get()] { raw->monitor_loop(); });
    return w;
}

Wrapper::Wrapper(WrapperOptions options)
    : options_(std::move(options)),
      journal_(options_.data_dir / "wrapper-journal.log"),
      dispatcher_(options_.name, options_.callback_deadline) {
    listener_ = std::make_unique<OffchainListener>(options_.wrapper_port, [this](const OffchainMessage& m) {
        std::function<void(const OffchainMessage&)> handler;
        {
            std::lock_guard lock(handler_mu_);
            handler = handler_;
        }
        if (handler) handler(m);
    });
    auto genesis_path = options_.data_dir / "genesis.json";
    if (std::filesystem::exists(genesis_path)) genesis_hash_ = genesis::read_genesis(genesis_path).genesis_hash;
}

Wrapper::~Wrapper() { detach(); }

void Wrapper::detach() {
    if (stopping_.exchange(true)) return;
    {
        std::lock_guard lock(sleep_mu_);
    }
    sleep_cv_.notify_all();
    if (monitor_.joinable()) monitor_.join();
    listener_->stop();
    dispatcher_.flush();
}

SubscriptionId Wrapper::subscribe(EventFilter filter, EventCallback callback) {
    return dispatcher_.subscribe(std::move(filter), std::move(callback));
}

void Wrapper::unsubscribe(SubscriptionId id) { dispatcher_.unsubscribe(id); }

void Wrapper::on_message(std::function<void(const OffchainMessage&)> handler) {
    std::lock_guard lock(handler_mu_);
    handler_ = std::move(handler);
}

std::uint16_t Wrapper::wrapper_port() const { return listener_->port(); }

std::int64_t Wrapper::observed_height() const { return observed_height_; }

void Wrapper::emit(NodeEvent event) {
    event.observed_at = std::chrono::system_clock::now();
    dispatcher_.post(std::move(event));
}

// ---------------------------------------------------------------------------
// Monitoring

void Wrapper::monitor_loop() {
    while (!stopping_) {
        {
            std::lock_guard lock(node_mu_);
            try {
                poll_once();
            } catch (const std::exception& e) {
                spdlog::warn("[{}] wrapper poll failed: {}", options_.name, e.what());
            }
        }
        std::unique_lock lock(sleep_mu_);
        sleep_cv_.wait_for(lock, options_.poll_period, [&] { return stopping_.load(); });
    }
}

void Wrapper::poll_once() {
    auto admin = this->admin();
    std::int64_t height = 0;
    try {
        height = admin.block_number();
    } catch (const Error& e) {
        if (!is_unreachable(e.code())) throw;
        ++consecutive_timeouts_;
        if (consecutive_timeouts_ != options_.unresponsive_threshold) return;
        spdlog::warn("[{}] node unresponsive after {} polls", options_.name, consecutive_timeouts_);
        NodeEvent ev;
        ev.kind = EventKind::NodeUnresponsive;
        ev.consecutive_timeouts = consecutive_timeouts_;
        emit(ev);
        if (options_.auto_recover && !recovery_blocked_) {
            try {
                recover_locked();
            } catch (const Error&) {
                recovery_blocked_ = true;  // until the node answers again
            }
        }
        return;
    }
    consecutive_timeouts_ = 0;
    recovery_blocked_ = false;

    if (!last_height_ || height < *last_height_) {
        auto status = admin.status();
        if (!genesis_hash_) genesis_hash_ = status.genesis_hash;
        spdlog::info("[{}] wrapper attached: height {}, {} peers, {} pending, fault {}", options_.name, status.height,
                     status.peers, status.pending, node::fault_name(status.fault));
        last_height_ = status.height;
        observed_height_ = status.height;
        peers_seen_ = status.peers;
        refresh_pending_locked();
        return;
    }

    for (std::int64_t h = *last_height_ + 1; h <= height; ++h) {
        auto block = admin.get_block(h);
        last_height_ = h;
        observed_height_ = h;
        NodeEvent nb;
        nb.kind = EventKind::NewBlock;
        nb.height = h;
        emit(nb);
        for (const auto& tx : block.transactions) {
            auto it = watch_from_.find(tx.tx_id);
            if (it == watch_from_.end()) continue;
            watch_from_.erase(it);
            journal_.mark_mined(tx.tx_id, h);
            NodeEvent mined;
            mined.kind = EventKind::TransactionMined;
            mined.tx_id = tx.tx_id;
            mined.height = h;
            emit(mined);
        }
        bool stalled = false;
        for (const auto& [id, from] : watch_from_) {
            if (h - from != options_.stall_threshold) continue;
            spdlog::warn("[{}] tx {} not mined after {} blocks", options_.name, id.hex().substr(0, 12), h - from);
            NodeEvent ev;
            ev.kind = EventKind::TransactionStalled;
            ev.tx_id = id;
            ev.blocks_waited = h - from;
            emit(ev);
            stalled = true;
        }
        if (stalled && options_.auto_recover) {
            try {
                recover_locked();
            } catch (const Error&) {
            }
            return;
        }
    }
}

void Wrapper::refresh_pending_locked() {
    auto admin = this->admin();
    std::int64_t height = last_height_.value_or(0);
    for (const auto& entry : journal_.pending()) {
        const auto& id = entry.tx.tx_id;
        auto lookup = admin.get_transaction(id);
        if (lookup.status == TxStatus::Mined) {
            watch_from_.erase(id);
            journal_.mark_mined(id, *lookup.height);
            NodeEvent mined;
            mined.kind = EventKind::TransactionMined;
            mined.tx_id = id;
            mined.height = *lookup.height;
            emit(mined);
            continue;
        }
        if (lookup.status == TxStatus::Unknown) {
            // Journaled but never reached the node.
            admin.submit_transaction(entry.tx);
            journal_.mark_resubmitted(id);
        }
        watch_from_.try_emplace(id, height);
    }
}

// ---------------------------------------------------------------------------
// Submission

node::Transaction Wrapper::make_transaction(const AccountId& recipient, std::int64_t value,
                                            std::optional<Digest> payload_hash) {
    std::lock_guard lock(node_mu_);
    if (!next_nonce_) {
        std::int64_t n = admin().get_nonce(options_.account);
        for (const auto& e : journal_.pending())
            if (e.tx.sender == options_.account) n = std::max(n, e.tx.nonce + 1);
        next_nonce_ = n;
    }
    node::Transaction tx;
    tx.sender = options_.account;
    tx.recipient = recipient;
    tx.value = value;
    tx.payload_hash = payload_hash;
    tx.cost = node::kTransferCost + (payload_hash ? node::kCommitmentCost : 0);
    tx.nonce = (*next_nonce_)++;
    return tx.seal();
}

Digest Wrapper::submit(const node::Transaction& tx) {
    std::lock_guard lock(node_mu_);
    journal_.record_submit(tx);
    node::SubmitReceipt receipt;
    try {
        receipt = admin().submit_transaction(tx);
    } catch (const Error& e) {
        if (is_unreachable(e.code())) {
            // Stays pending in the journal; recovery resubmits it.
            watch_from_.try_emplace(tx.tx_id, last_height_.value_or(0));
        } else {
            journal_.mark_failed(tx.tx_id, e.what());
            next_nonce_.reset();
        }
        throw;
    }
    if (receipt.duplicate) {
        auto lookup = admin().get_transaction(tx.tx_id);
        if (lookup.status == TxStatus::Mined) {
            journal_.mark_mined(tx.tx_id, *lookup.height);
            return tx.tx_id;
        }
    }
    auto entry = journal_.find(tx.tx_id);
    if (entry && entry->status == JournalStatus::Pending) watch_from_.try_emplace(tx.tx_id, receipt.height);
    return tx.tx_id;
}

// ---------------------------------------------------------------------------
// Recovery

RecoveryReport Wrapper::recover() {
    std::lock_guard lock(node_mu_);
    return recover_locked();
}

RecoveryReport Wrapper::recover_locked() {
    ++recoveries_;
    spdlog::warn("[{}] recovering node", options_.name);
    try {
        peers_seen_ = std::max(peers_seen_, admin().status().peers);
    } catch (const Error&) {
    }
    if (port_open(options_.admin)) {
        try {
            node::AdminClient(options_.admin, options_.stop_grace).stop();
        } catch (const Error&) {
        }
        if (!node::wait_port_closed(options_.admin, options_.stop_grace)) {
            spdlog::warn("[{}] node ignored stop; killing it", options_.name);
            options_.kill();
            node::wait_port_closed(options_.admin, std::chrono::milliseconds(5000));
        }
    }

    RecoveryReport report;
    auto backoff = options_.backoff_initial;
    auto admin = this->admin();
    for (int attempt = 1;; ++attempt) {
        report.attempts = attempt;
        try {
            options_.launch();
            if (!node::wait_port_open(options_.admin, options_.restart_deadline))
                throw Error(Errc::Timeout, "admin port did not open");
            auto status = admin.status();
            if (genesis_hash_ && status.genesis_hash != *genesis_hash_)
                throw Error(Errc::GenesisMismatch, "restarted node runs genesis " + status.genesis_hash.hex());
            report.restarted = true;
            break;
        } catch (const std::exception& e) {
            spdlog::warn("[{}] restart attempt {} failed: {}", options_.name, attempt, e.what());
            if (attempt >= options_.max_restarts) {
                NodeEvent ev;
                ev.kind = EventKind::RecoveryFailed;
                ev.detail = e.what();
                emit(ev);
                throw Error(Errc::RecoveryFailed,
                            options_.name + ": gave up after " + std::to_string(attempt) + " restarts: " + e.what());
            }
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    consecutive_timeouts_ = 0;

    // Let the node rejoin its peers and catch up, so blocks mined while it
    // was down are not counted against resubmitted transactions.
    auto until = std::chrono::steady_clock::now() + options_.restart_deadline;
    while (std::chrono::steady_clock::now() < until) {
        auto status = admin.status();
        if (status.peers >= peers_seen_ && !status.syncing()) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }

    auto height = admin.block_number();
    for (const auto& entry : journal_.pending()) {
        const auto& id = entry.tx.tx_id;
        auto lookup = admin.get_transaction(id);
        if (lookup.status == TxStatus::Mined) {
            watch_from_.erase(id);
            journal_.mark_mined(id, *lookup.height);
            NodeEvent mined;
            mined.kind = EventKind::TransactionMined;
            mined.tx_id = id;
            mined.height = *lookup.height;
            emit(mined);
            continue;
        }
        try {
            admin.submit_transaction(entry.tx);
        } catch (const Error& e) {
            if (is_unreachable(e.code())) throw;
            spdlog::error("[{}] resubmit of {} rejected: {}", options_.name, id.hex().substr(0, 12), e.what());
            journal_.mark_failed(id, e.what());
            watch_from_.erase(id);
            next_nonce_.reset();
            continue;
        }
        journal_.mark_resubmitted(id);
        watch_from_[id] = height;
        ++report.resubmitted;
    }
    spdlog::info("[{}] recovered after {} attempt(s), {} tx resubmitted", options_.name, report.attempts,
                 report.resubmitted);
    NodeEvent ev;
    ev.kind = EventKind::Recovered;
    ev.height = height;
    ev.detail = "resubmitted " + std::to_string(report.resubmitted);
    emit(ev);
    return report;
}

// ---------------------------------------------------------------------------
// Off-chain

DeliveryReceipt Wrapper::send_offchain(const Endpoint& peer, const std::string& kind, const std::string& payload) {
    static const std::string salt = session_salt();
    static std::atomic<std::uint64_t> seq{0};
    auto id = sha256(options_.name + "|" + salt + "|" + std::to_string(seq++)).hex();
    return actor::send_offchain(peer, OffchainMessage{id, kind, payload});
}

PrivateSubmission Wrapper::submit_with_privacy(const std::string& payload, const AccountId& recipient,
                                               std::int64_t value, const std::vector<Endpoint>& peers) {
    auto tx = make_transaction(recipient, value, sha256(payload));
    PrivateSubmission out;
    out.tx_id = submit(tx);
    out.msg_id = out.tx_id.hex();
    for (const auto& peer : peers)
        out.receipts.push_back(actor::send_offchain(peer, OffchainMessage{out.msg_id, "private", payload}));
    return out;
}

bool verify_private_payload(const node::AdminClient& admin, const Digest& tx_id, std::string_view payload) {
    auto lookup = admin.get_transaction(tx_id);
    if (!lookup.transaction || !lookup.transaction->payload_hash) return false;
    return *lookup.transaction->payload_hash == sha256(payload);
}

}  // namespace tnet::actor
