/*
 * test_actor.cpp
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

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <vector>

#include "support/test_support.hpp"
#include "tnet/actor/wrapper.hpp"
#include "tnet/error.hpp"

using namespace tnet;
using namespace tnet::actor;
using namespace std::chrono_literals;

namespace {

Errc error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

NodeEvent block_event(std::int64_t h) {
    NodeEvent e;
    e.kind = EventKind::NewBlock;
    e.height = h;
    return e;
}

/// Thread-safe event recorder.
struct Recorder {
    std::mutex mu;
    std::vector<NodeEvent> events;

    EventCallback callback() {
        return [this](const NodeEvent& e) {
            std::lock_guard lock(mu);
            events.push_back(e);
        };
    }
    std::vector<NodeEvent> of(EventKind kind) {
        std::lock_guard lock(mu);
        std::vector<NodeEvent> out;
        for (const auto& e : events)
            if (e.kind == kind) out.push_back(e);
        return out;
    }
    std::size_t count(EventKind kind) { return of(kind).size(); }
};

WrapperOptions wrapper_options(const testing::ProcessNet& net, const std::string& name) {
    WrapperOptions o;
    o.name = name;
    o.account = net.account(name);
    o.admin = net.admin_endpoint(name);
    o.data_dir = net.data_dir(name);
    o.poll_period = 100ms;
    o.admin_timeout = 300ms;
    o.backoff_initial = 50ms;
    return o;
}

}  // namespace

TEST_CASE("dispatcher delivers in order to every matching subscriber") {
    Dispatcher d("test");
    Recorder a, b, c;
    d.subscribe(kind_is(EventKind::NewBlock), a.callback());
    auto sb = d.subscribe(kind_is(EventKind::NewBlock), b.callback());
    d.subscribe(kind_is(EventKind::TransactionMined), c.callback());
    for (int h = 1; h <= 3; ++h) d.post(block_event(h));
    d.flush();
    d.unsubscribe(sb);
    d.post(block_event(4));
    d.flush();
    REQUIRE(a.events.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(a.events[i].height == i + 1);
    CHECK(b.events.size() == 3);
    CHECK(c.events.empty());
}

TEST_CASE("dispatcher flags slow callbacks and survives throwing ones") {
    Dispatcher d("test", 20ms);
    d.subscribe(kind_is(EventKind::NewBlock), [](const NodeEvent&) { std::this_thread::sleep_for(50ms); });
    d.subscribe(kind_is(EventKind::NewBlock), [](const NodeEvent&) { throw std::runtime_error("boom"); });
    Recorder after;
    d.subscribe(kind_is(EventKind::NewBlock), after.callback());
    d.post(block_event(1));
    d.flush();
    CHECK(d.slow_callbacks() == 1);
    CHECK(after.events.size() == 1);
}

TEST_CASE("journal is write-ahead, idempotent and survives reload") {
    testing::TempDir dir;
    auto path = dir.path() / "wrapper-journal.log";
    node::Transaction tx;
    tx.sender = genesis::derive_account("j", "a");
    tx.recipient = genesis::derive_account("j", "b");
    tx.value = 5;
    tx.cost = node::kTransferCost;
    tx.seal();
    auto tx2 = tx;
    tx2.nonce = 1;
    tx2.seal();
    {
        TxJournal j(path);
        CHECK(j.record_submit(tx));
        CHECK_FALSE(j.record_submit(tx));
        CHECK(j.record_submit(tx2));
        j.mark_resubmitted(tx.tx_id);
        j.mark_mined(tx2.tx_id, 7);
    }
    // Simulated crash mid-append.
    std::ofstream(path, std::ios::app) << "{\"op\":\"mined\",\"txId\":";
    TxJournal j(path);
    auto entries = j.entries();
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].tx == tx);
    CHECK(entries[0].status == JournalStatus::Pending);
    CHECK(entries[0].resubmits == 1);
    CHECK(entries[1].status == JournalStatus::Mined);
    CHECK(entries[1].mined_height == 7);
    CHECK(j.pending().size() == 1);
}

TEST_CASE("off-chain channel") {
    std::mutex mu;
    std::vector<OffchainMessage> got;
    OffchainListener listener(0, [&](const OffchainMessage& m) {
        std::lock_guard lock(mu);
        got.push_back(m);
    });
    Endpoint ep{"127.0.0.1", listener.port()};

    SUBCASE("receipt and de-duplication") {
        std::string bytes("\x00\xffpayload", 9);
        auto r1 = send_offchain(ep, {"m1", "order", bytes});
        CHECK(r1.msg_id == "m1");
        CHECK_FALSE(r1.duplicate);
        auto r2 = send_offchain(ep, {"m1", "order", bytes});
        CHECK(r2.duplicate);
        REQUIRE(got.size() == 1);
        CHECK(got[0].payload == bytes);
        CHECK(got[0].kind == "order");
        CHECK(listener.delivered() == 1);
    }
    SUBCASE("dead peer") {
        CHECK(error_of([&] { send_offchain({"127.0.0.1", free_port()}, {"m", "k", ""}, 2, 200ms); }) ==
              Errc::PeerUnreachable);
    }
    SUBCASE("port already bound") {
        CHECK(error_of([&] { OffchainListener again(listener.port(), nullptr); }) == Errc::BindFailure);
    }
    SUBCASE("wire encoding round-trips") {
        OffchainMessage m{"id", "kind", std::string("\x01\x02", 2)};
        auto back = decode_offchain(encode_offchain(m));
        CHECK(back.msg_id == m.msg_id);
        CHECK(back.payload == m.payload);
    }
}

TEST_CASE("wrapper over a live network") {
    testing::ProcessNet net(testing::local_config("actortest", 2, 1'000'000));
    net.launch_all();
    net.connect_all();
    auto options = wrapper_options(net, "prosumer1");
    options.wrapper_port = *dsl::node_lookup(net.config(), "prosumer1").wrapper_port;
    auto w = Wrapper::attach(options);
    Recorder rec;
    w->subscribe([](const NodeEvent&) { return true; }, rec.callback());
    REQUIRE(testing::wait_until([&] { return w->observed_height() >= 0; }, 5s));

    SUBCASE("attach twice on one wrapper port fails") {
        CHECK(error_of([&] { Wrapper::attach(options); }) == Errc::BindFailure);
    }
    SUBCASE("NewBlock events arrive in height order") {
        auto h0 = w->observed_height();
        REQUIRE(testing::wait_until([&] { return rec.count(EventKind::NewBlock) >= 3; }, 5s));
        auto blocks = rec.of(EventKind::NewBlock);
        for (std::size_t i = 0; i < blocks.size(); ++i) CHECK(blocks[i].height == h0 + 1 + std::int64_t(i));
    }
    SUBCASE("healthy submit is mined and journaled") {
        auto tx = w->make_transaction(net.account("prosumer2"), 10);
        auto id = w->submit(tx);
        CHECK(w->submit(tx) == id);
        REQUIRE(testing::wait_until([&] { return rec.count(EventKind::TransactionMined) == 1; }, 5s));
        CHECK(rec.of(EventKind::TransactionMined)[0].tx_id == id);
        CHECK(w->journal().entries().size() == 1);
        CHECK(w->journal().find(id)->status == JournalStatus::Mined);
        CHECK(w->recoveries() == 0);
    }
    SUBCASE("node errors mark the entry failed") {
        auto tx = w->make_transaction(net.account("prosumer2"), 5'000'000);
        CHECK(error_of([&] { w->submit(tx); }) == Errc::InsufficientBalance);
        CHECK(w->journal().find(tx.tx_id)->status == JournalStatus::Failed);
        // The nonce is reused by the next transaction.
        auto next = w->make_transaction(net.account("prosumer2"), 1);
        CHECK(next.nonce == tx.nonce);
        w->submit(next);
    }
    SUBCASE("stalled transaction triggers recovery and is mined after restart") {
        net.admin("prosumer1").set_fault(node::FaultMode::StallMempool);
        auto tx = w->make_transaction(net.account("prosumer2"), 3);
        auto receipt_height = net.admin("prosumer1").block_number();
        auto id = w->submit(tx);
        REQUIRE(testing::wait_until([&] { return rec.count(EventKind::TransactionStalled) == 1; }, 10s));
        auto stalled = rec.of(EventKind::TransactionStalled)[0];
        CHECK(stalled.tx_id == id);
        CHECK(stalled.blocks_waited == 3);
        REQUIRE(testing::wait_until([&] { return rec.count(EventKind::TransactionMined) == 1; }, 15s));
        CHECK(w->recoveries() == 1);
        auto entry = w->journal().find(id);
        CHECK(entry->status == JournalStatus::Mined);
        CHECK(entry->resubmits == 1);
        CHECK(*entry->mined_height > receipt_height + 3);
        CHECK(net.admin("prosumer1").status().fault == node::FaultMode::None);
    }
    SUBCASE("unresponsive node is replaced with its chain intact") {
        REQUIRE(testing::wait_until([&] { return w->observed_height() >= 2; }, 5s));
        auto before = net.admin("prosumer1").block_number();
        net.admin("prosumer1").set_fault(node::FaultMode::Unresponsive);
        REQUIRE(testing::wait_until([&] { return rec.count(EventKind::Recovered) == 1; }, 20s));
        auto unresponsive = rec.of(EventKind::NodeUnresponsive);
        REQUIRE(unresponsive.size() == 1);
        CHECK(unresponsive[0].consecutive_timeouts == 3);
        auto status = net.admin("prosumer1").status();
        CHECK(status.height >= before);
        CHECK(status.fault == node::FaultMode::None);
        CHECK(status.genesis_hash == net.genesis().genesis_hash);
    }
}

TEST_CASE("recovery gives up after max_restarts") {
    testing::ProcessNet net(testing::local_config("actorfail", 1));
    net.launch("prosumer1");
    auto options = wrapper_options(net, "prosumer1");
    options.auto_recover = false;
    options.max_restarts = 3;
    std::atomic<int> launches{0};
    options.launch = [&] {
        ++launches;
        throw Error(Errc::ExecutorFailure, "refusing to start");
    };
    auto w = Wrapper::attach(options);
    Recorder rec;
    w->subscribe(kind_is(EventKind::RecoveryFailed), rec.callback());
    CHECK(error_of([&] { w->recover(); }) == Errc::RecoveryFailed);
    CHECK(launches == 3);
    w->flush_events();
    CHECK(rec.events.size() == 1);
}

TEST_CASE("attach with the node down reports it unresponsive") {
    testing::ProcessNet net(testing::local_config("actordown", 1));
    auto options = wrapper_options(net, "prosumer1");
    options.auto_recover = false;
    auto w = Wrapper::attach(options);
    Recorder rec;
    w->subscribe(kind_is(EventKind::NodeUnresponsive), rec.callback());
    REQUIRE(testing::wait_until([&] { return rec.count(EventKind::NodeUnresponsive) == 1; }, 5s));
    CHECK(rec.of(EventKind::NodeUnresponsive)[0].consecutive_timeouts == 3);
}

TEST_CASE("submit_with_privacy commits only the digest") {
    testing::ProcessNet net(testing::local_config("actorpriv", 2, 1'000'000));
    net.launch_all();
    net.connect_all();
    auto w1 = Wrapper::attach(wrapper_options(net, "prosumer1"));
    auto w2 = Wrapper::attach(wrapper_options(net, "prosumer2"));
    std::mutex mu;
    std::vector<OffchainMessage> inbox;
    w2->on_message([&](const OffchainMessage& m) {
        std::lock_guard lock(mu);
        inbox.push_back(m);
    });
    Endpoint peer{"127.0.0.1", w2->wrapper_port()};

    for (std::string payload : {std::string("secret meter reading 42"), std::string()}) {
        auto sub = w1->submit_with_privacy(payload, net.account("prosumer2"), 1, {peer});
        CHECK(sub.msg_id == sub.tx_id.hex());
        REQUIRE(sub.receipts.size() == 1);
        auto lookup = net.admin("prosumer1").get_transaction(sub.tx_id);
        REQUIRE(lookup.transaction);
        CHECK(lookup.transaction->payload_hash == sha256(payload));
        CHECK(lookup.transaction->cost == node::kTransferCost + node::kCommitmentCost);
        REQUIRE(testing::wait_until(
            [&] { return net.admin("prosumer2").get_transaction(sub.tx_id).status == node::TxStatus::Mined; }, 5s));
        CHECK(verify_private_payload(net.admin("prosumer2"), sub.tx_id, payload));
        CHECK_FALSE(verify_private_payload(net.admin("prosumer1"), sub.tx_id, payload + "x"));
    }
    std::lock_guard lock(mu);
    REQUIRE(inbox.size() == 2);
    CHECK(inbox[0].payload == "secret meter reading 42");
    CHECK(inbox[1].payload.empty());
}
