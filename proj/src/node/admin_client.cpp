/*
 * admin_client.cpp
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

#include "tnet/node/admin_client.hpp"

#include "tnet/error.hpp"

namespace tnet::node {

NodeStatus NodeStatus::from_json(const Json& j) {
    NodeStatus s;
    s.name = j.at("name").get<std::string>();
    s.role = j.at("role").get<std::string>();
    s.height = j.at("height").get<std::int64_t>();
    s.peers = j.at("peers").get<std::size_t>();
    s.peer_names = j.at("peerNames").get<std::vector<std::string>>();
    s.peer_height = j.value("peerHeight", std::int64_t{0});
    s.pending = j.at("pending").get<std::size_t>();
    s.fault = parse_fault(j.at("fault").get<std::string>());
    s.genesis_hash = Digest::from_hex(j.at("genesisHash").get<std::string>());
    s.account = AccountId::from_hex(j.at("account").get<std::string>());
    return s;
}

Json AdminClient::call(const std::string& op, const Json& params) const {
    Socket sock = Socket::connect(endpoint_, timeout_);
    Json request = {{"op", op}, {"params", params}};
    sock.send_all(canonical(request) + "\n");
    auto line = sock.read_line(timeout_);
    if (!line) throw Error(Errc::ConnectionRefused, endpoint_.str() + " closed the admin connection");
    Json response = parse_json(*line);
    if (!response.value("ok", false)) {
        const auto& err = response.at("error");
        throw Error(errc_from_name(err.value("code", "Internal")), err.value("message", ""));
    }
    return response.at("result");
}

NodeStatus AdminClient::status() const { return NodeStatus::from_json(call("status")); }

std::int64_t AdminClient::block_number() const { return call("block_number").get<std::int64_t>(); }

std::int64_t AdminClient::get_balance(const AccountId& account) const {
    return call("get_balance", {{"account", account.hex()}}).get<std::int64_t>();
}

std::int64_t AdminClient::get_nonce(const AccountId& account) const {
    return call("get_nonce", {{"account", account.hex()}}).get<std::int64_t>();
}

std::size_t AdminClient::pending_count() const { return call("pending_count").get<std::size_t>(); }

TxLookup AdminClient::get_transaction(const Digest& tx_id) const {
    auto r = call("get_transaction", {{"txId", tx_id.hex()}});
    TxLookup out;
    auto status = r.at("status").get<std::string>();
    out.status = status == "mined" ? TxStatus::Mined : status == "pending" ? TxStatus::Pending : TxStatus::Unknown;
    if (r.contains("height")) out.height = r["height"].get<std::int64_t>();
    if (r.contains("transaction")) out.transaction = Transaction::from_json(r["transaction"]);
    return out;
}

Block AdminClient::get_block(std::int64_t height) const {
    return Block::from_json(call("get_block", {{"height", height}}));
}

SubmitReceipt AdminClient::submit_transaction(const Transaction& tx) const {
    try {
        auto r = call("submit_transaction", {{"tx", tx.to_json()}});
        return {Digest::from_hex(r.at("txId").get<std::string>()), r.at("height").get<std::int64_t>(),
                r.value("duplicate", false)};
    } catch (const Error& e) {
        if (e.code() == Errc::Timeout) throw Error(Errc::NodeUnresponsive, endpoint_.str() + " did not respond");
        throw;
    }
}

std::size_t AdminClient::add_peer(const Endpoint& peer) const {
    return call("add_peer", {{"endpoint", peer.str()}}).at("peers").get<std::size_t>();
}

void AdminClient::set_fault(FaultMode mode) const { call("set_fault", {{"mode", std::string(fault_name(mode))}}); }

void AdminClient::stop() const { call("stop"); }

}  // namespace tnet::node
