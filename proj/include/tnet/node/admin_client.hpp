/*
 * admin_client.hpp
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

#include <optional>
#include <string>
#include <vector>

#include "tnet/json.hpp"
#include "tnet/net.hpp"
#include "tnet/node/types.hpp"

namespace tnet::node {

struct NodeStatus {
    std::string name;
    std::string role;
    std::int64_t height = 0;
    std::size_t peers = 0;
    std::vector<std::string> peer_names;
    /// Highest height any connected peer has announced.
    std::int64_t peer_height = 0;
    std::size_t pending = 0;
    FaultMode fault = FaultMode::None;
    Digest genesis_hash;
    AccountId account;

    bool syncing() const { return peer_height > height; }

    static NodeStatus from_json(const Json& j);
};

enum class TxStatus { Unknown, Pending, Mined };

struct TxLookup {
    TxStatus status = TxStatus::Unknown;
    std::optional<std::int64_t> height;
    std::optional<Transaction> transaction;
};

struct SubmitReceipt {
    Digest tx_id;
    std::int64_t height = 0;  // node height when accepted
    bool duplicate = false;
};

/// Client for the admin protocol: one newline-delimited JSON request and
/// response per call over a fresh TCP connection. Any call throws
/// Error(Timeout) if no response arrives within the deadline and rethrows
/// node-side errors with their original code.
class AdminClient {
public:
    explicit AdminClient(Endpoint endpoint, Millis timeout = Millis(2000))
        : endpoint_(std::move(endpoint)), timeout_(timeout) {}

    const Endpoint& endpoint() const { return endpoint_; }
    void set_timeout(Millis timeout) { timeout_ = timeout; }

    Json call(const std::string& op, const Json& params = Json::object()) const;

    NodeStatus status() const;
    std::int64_t block_number() const;
    std::int64_t get_balance(const AccountId& account) const;
    std::int64_t get_nonce(const AccountId& account) const;
    std::size_t pending_count() const;
    TxLookup get_transaction(const Digest& tx_id) const;
    Block get_block(std::int64_t height) const;
    /// Maps a response timeout to Error(NodeUnresponsive).
    SubmitReceipt submit_transaction(const Transaction& tx) const;
    std::size_t add_peer(const Endpoint& peer) const;
    void set_fault(FaultMode mode) const;
    void stop() const;

private:
    Endpoint endpoint_;
    Millis timeout_;
};

}  // namespace tnet::node
