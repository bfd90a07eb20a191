/*
 * wrapper.hpp
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
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tnet/actor/events.hpp"
#include "tnet/actor/journal.hpp"
#include "tnet/actor/offchain.hpp"
#include "tnet/node/admin_client.hpp"

namespace tnet::actor {

struct WrapperOptions {
    std::string name;
    AccountId account;
    Endpoint admin;
    std::filesystem::path data_dir;
    /// 0 picks an ephemeral port.
    std::uint16_t wrapper_port = 0;

    std::chrono::milliseconds poll_period{500};
    std::chrono::milliseconds admin_timeout{500};
    int stall_threshold = 3;
    int unresponsive_threshold = 3;

    /// Run recover() on TransactionStalled / NodeUnresponsive.
    bool auto_recover = true;
    int max_restarts = 3;
    std::chrono::milliseconds backoff_initial{250};
    std::chrono::milliseconds stop_grace{2000};
    std::chrono::milliseconds restart_deadline{10000};
    std::chrono::milliseconds callback_deadline{100};

    /// Starts the node process from data_dir. Defaults to the local
    /// chainnode binary.
    std::function<void()> launch;
    /// Force-stops the node when the admin stop is ignored. Defaults to
    /// SIGKILL of the pid in data_dir/node.pid.
    std::function<void()> kill;
};

struct RecoveryReport {
    bool restarted = false;
    int attempts = 0;
    std::size_t resubmitted = 0;
};

struct PrivateSubmission {
    Digest tx_id;
    std::string msg_id;
    std::vector<DeliveryReceipt> receipts;
};

/// Supervisor for one node: polls it, turns what it sees into events,
/// journals submitted transactions, restarts the node when it stalls or
/// stops answering, and exchanges off-chain messages with other wrappers.
///
/// Public operations may be called from any thread.
class Wrapper {
public:
    /// Binds the off-chain listener (Error(BindFailure)) and starts the
    /// monitor loop. The node need not be up yet.
    static std::unique_ptr<Wrapper> attach(WrapperOptions options);
    ~Wrapper();
    Wrapper(const Wrapper&) = delete;
    Wrapper& operator=(const Wrapper&) = delete;

    SubscriptionId subscribe(EventFilter filter, EventCallback callback);
    void unsubscribe(SubscriptionId id);

    /// Transfer from this wrapper's account with the next free nonce.
    node::Transaction make_transaction(const AccountId& recipient, std::int64_t value,
                                       std::optional<Digest> payload_hash = std::nullopt);
    /// Journals then submits. Submitting a journaled tx again does not add
    /// an entry. Node errors propagate and mark the entry failed.
    Digest submit(const node::Transaction& tx);

    /// Stop (or kill), restart from the data directory, verify the genesis
    /// hash and resubmit pending journal entries. Throws
    /// Error(RecoveryFailed) after max_restarts failed launches.
    RecoveryReport recover();

    DeliveryReceipt send_offchain(const Endpoint& peer, const std::string& kind, const std::string& payload);
    /// Commits sha256(payload) on-chain in a transfer to `recipient` and
    /// sends the payload itself to each peer wrapper. The message id is the
    /// tx id in hex.
    PrivateSubmission submit_with_privacy(const std::string& payload, const AccountId& recipient, std::int64_t value,
                                          const std::vector<Endpoint>& peers);
    /// Handler for incoming off-chain messages (one call per message id),
    /// run on the listener thread.
    void on_message(std::function<void(const OffchainMessage&)> handler);

    const WrapperOptions& options() const { return options_; }
    std::uint16_t wrapper_port() const;
    node::AdminClient admin() const { return node::AdminClient(options_.admin, options_.admin_timeout); }
    TxJournal& journal() { return journal_; }
    /// Highest block height delivered as a NewBlock event.
    std::int64_t observed_height() const;
    int recoveries() const { return recoveries_; }
    std::uint64_t slow_callbacks() const { return dispatcher_.slow_callbacks(); }
    /// Waits until all queued events have been delivered.
    void flush_events() { dispatcher_.flush(); }

    void detach();

private:
    explicit Wrapper(WrapperOptions options);

    void monitor_loop();
    void poll_once();
    void emit(NodeEvent event);
    RecoveryReport recover_locked();
    void refresh_pending_locked();

    WrapperOptions options_;
    TxJournal journal_;
    Dispatcher dispatcher_;
    std::unique_ptr<OffchainListener> listener_;
    std::mutex handler_mu_;
    std::function<void(const OffchainMessage&)> handler_;

    // Guards node interaction: polls, submissions and recovery.
    mutable std::mutex node_mu_;
    std::optional<std::int64_t> last_height_;
    std::map<Digest, std::int64_t> watch_from_;  // pending tx -> height it was (re)submitted at
    std::optional<std::int64_t> next_nonce_;
    int consecutive_timeouts_ = 0;
    std::size_t peers_seen_ = 0;
    bool recovery_blocked_ = false;
    std::optional<Digest> genesis_hash_;

    std::atomic<int> recoveries_{0};
    std::atomic<std::int64_t> observed_height_{-1};
    std::atomic<bool> stopping_{false};
    std::mutex sleep_mu_;
    std::condition_variable sleep_cv_;
    std::thread monitor_;
};

/// True iff the transaction is known to the node and its payload_hash is
/// sha256(payload).
bool verify_private_payload(const node::AdminClient& admin, const Digest& tx_id, std::string_view payload);

}  // namespace tnet::actor
