/*
 * offchain.hpp
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
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "tnet/net.hpp"

namespace tnet::actor {

struct OffchainMessage {
    std::string msg_id;
    std::string kind;
    std::string payload;  // raw bytes
};

struct DeliveryReceipt {
    std::string msg_id;
    bool duplicate = false;  // receiver had already seen this id
    int attempts = 1;
};

/// Wire form of one message: a length-prefixed canonical-JSON frame
/// {"msg_id","kind","payload"} with the payload hex-encoded. The receiver
/// answers each frame with {"ack": msg_id, "duplicate": bool}.
std::string encode_offchain(const OffchainMessage& message);
OffchainMessage decode_offchain(std::string_view frame);

/// Delivers one message with retries (at-least-once). Throws
/// Error(PeerUnreachable) when no attempt is acknowledged.
DeliveryReceipt send_offchain(const Endpoint& peer, const OffchainMessage& message, int attempts = 3,
                              Millis timeout = Millis(2000));

/// TCP listener for off-chain messages. Each message id is handed to the
/// handler once; repeats are acknowledged as duplicates.
class OffchainListener {
public:
    using Handler = std::function<void(const OffchainMessage&)>;

    /// Throws Error(BindFailure) if the port is taken.
    OffchainListener(std::uint16_t port, Handler handler);
    ~OffchainListener();
    OffchainListener(const OffchainListener&) = delete;
    OffchainListener& operator=(const OffchainListener&) = delete;

    std::uint16_t port() const { return port_; }
    std::size_t delivered() const;
    void stop();

private:
    void accept_loop();
    void serve(std::shared_ptr<Socket> sock);

    std::uint16_t port_;
    Handler handler_;
    Socket listener_;
    std::atomic<bool> stopping_{false};
    std::mutex deliver_mu_;
    mutable std::mutex mu_;
    std::set<std::string> seen_;
    std::list<std::thread> conns_;
    std::list<std::shared_ptr<Socket>> conn_socks_;
    std::thread acceptor_;
};

}  // namespace tnet::actor
