/*
 * offchain.cpp
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

#include "tnet/actor/offchain.hpp"

#include <spdlog/spdlog.h>

#include "tnet/digest.hpp"
#include "tnet/error.hpp"
#include "tnet/json.hpp"

namespace tnet::actor {

std::string encode_offchain(const OffchainMessage& message) {
    std::string_view bytes = message.payload;
    Json j = {{"msg_id", message.msg_id},
              {"kind", message.kind},
              {"payload", to_hex({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()})}};
    return canonical(j);
}

OffchainMessage decode_offchain(std::string_view frame) {
    Json j = parse_json(frame);
    try {
        return {j.at("msg_id").get<std::string>(), j.at("kind").get<std::string>(),
                from_hex_bytes(j.at("payload").get<std::string>())};
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRequest, std::string("off-chain frame: ") + e.what());
    }
}

DeliveryReceipt send_offchain(const Endpoint& peer, const OffchainMessage& message, int attempts, Millis timeout) {
    std::string frame = encode_offchain(message);
    std::string last_error = "no attempt made";
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            Socket sock = Socket::connect(peer, timeout);
            sock.send_frame(frame);
            auto reply = sock.read_frame(timeout);
            if (!reply) throw Error(Errc::IoError, "connection closed before ack");
            Json ack = parse_json(*reply);
            if (ack.value("ack", "") != message.msg_id) throw Error(Errc::MalformedRequest, "ack for another message");
            return {message.msg_id, ack.value("duplicate", false), attempt};
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    throw Error(Errc::PeerUnreachable, peer.str() + ": " + last_error);
}

OffchainListener::OffchainListener(std::uint16_t port, Handler handler) : handler_(std::move(handler)) {
    try {
        listener_ = Socket::listen(port);
    } catch (const Error& e) {
        throw Error(Errc::BindFailure, "wrapper port " + std::to_string(port) + ": " + e.detail());
    }
    port_ = listener_.local_port();
    acceptor_ = std::thread([this] { accept_loop(); });
}

OffchainListener::~OffchainListener() { stop(); }

std::size_t OffchainListener::delivered() const {
    std::lock_guard lock(mu_);
    return seen_.size();
}

void OffchainListener::stop() {
    if (stopping_.exchange(true)) return;
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
    std::list<std::thread> conns;
    {
        std::lock_guard lock(mu_);
        for (auto& s : conn_socks_) s->shutdown();
        conns.swap(conns_);
    }
    for (auto& t : conns) t.join();
    listener_.close();
}

void OffchainListener::accept_loop() {
    while (!stopping_) {
        Socket sock = listener_.accept();
        if (!sock.valid()) break;
        auto shared = std::make_shared<Socket>(std::move(sock));
        std::lock_guard lock(mu_);
        if (stopping_) break;
        conn_socks_.push_back(shared);
        conns_.emplace_back([this, shared] { serve(shared); });
    }
}

void OffchainListener::serve(std::shared_ptr<Socket> sock) {
    try {
        while (!stopping_) {
            auto frame = sock->read_frame();
            if (!frame) break;
            auto message = decode_offchain(*frame);
            bool fresh;
            {
                // Deliver before recording and acking, so an ack means the
                // message was handled.
                std::lock_guard deliver(deliver_mu_);
                {
                    std::lock_guard lock(mu_);
                    fresh = !seen_.contains(message.msg_id);
                }
                if (fresh && handler_) handler_(message);
                std::lock_guard lock(mu_);
                seen_.insert(message.msg_id);
            }
            sock->send_frame(canonical(Json{{"ack", message.msg_id}, {"duplicate", !fresh}}));
        }
    } catch (const std::exception& e) {
        if (!stopping_) spdlog::debug("off-chain connection ended: {}", e.what());
    }
    sock->shutdown();
}

}  // namespace tnet::actor
