/*
 * test_tes.cpp
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

#include <map>
#include <random>
#include <set>

#include "support/market_oracle.hpp"
#include "support/test_support.hpp"
#include "tnet/error.hpp"
#include "tnet/manager/manager.hpp"
#include "tnet/tes/day.hpp"

using namespace tnet;
using namespace tnet::tes;
using namespace std::chrono_literals;

namespace {

Order offer(std::string actor, std::int64_t q, std::int64_t p) { return {std::move(actor), 0, Side::Offer, q, p}; }
Order bid(std::string actor, std::int64_t q, std::int64_t p) { return {std::move(actor), 0, Side::Bid, q, p}; }

Errc error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

/// Invariants every clearing result must satisfy for its book.
void check_result(const ClearingResult& r, const std::vector<Order>& offers, const std::vector<Order>& bids) {
    std::map<std::string, std::int64_t> offered, wanted, sold, bought;
    std::int64_t supply = 0, demand = 0;
    for (const auto& o : offers) {
        offered[o.actor] += o.quantity;
        supply += o.quantity;
    }
    for (const auto& b : bids) {
        wanted[b.actor] += b.quantity;
        demand += b.quantity;
    }
    std::int64_t paid = 0, received = 0;
    for (const auto& t : r.trades) {
        CHECK(t.quantity > 0);
        CHECK(t.unit_price == r.clearing_price);
        sold[t.seller] += t.quantity;
        bought[t.buyer] += t.quantity;
        paid += t.quantity * t.unit_price;
        received += t.quantity * t.unit_price;
    }
    std::int64_t total_sold = 0, total_bought = 0;
    for (const auto& [a, q] : sold) {
        CHECK(q <= offered[a]);
        total_sold += q;
    }
    for (const auto& [a, q] : bought) {
        CHECK(q <= wanted[a]);
        total_bought += q;
    }
    CHECK(total_sold == total_bought);
    CHECK(paid == received);
    CHECK(r.matched_quantity() == total_sold);
    CHECK(r.dso_residual == demand - r.matched_quantity());
    CHECK(r.unmatched_supply == supply - r.matched_quantity());
    // The grid closes every actor's position.
    std::int64_t grid_in = 0, grid_out = 0;
    for (const auto& g : r.grid) {
        CHECK(g.quantity != 0);
        if (g.quantity > 0) {
            grid_in += g.quantity;
            CHECK(bought[g.actor] + g.quantity == wanted[g.actor]);
        } else {
            grid_out -= g.quantity;
            CHECK(sold[g.actor] - g.quantity == offered[g.actor]);
        }
    }
    CHECK(grid_in == r.dso_residual);
    CHECK(grid_out == r.unmatched_supply);
    CHECK(r.matched_quantity() == testing::brute_force_max_matched(offers, bids));
}

}  // namespace

TEST_CASE("clearing: two offers against one bid") {
    std::vector<Order> offers{offer("A", 5, 10), offer("B", 5, 20)};
    std::vector<Order> bids{bid("C", 8, 25)};
    auto r = clear_market(0, offers, bids, {30, 5});
    REQUIRE(r.trades.size() == 2);
    CHECK(r.trades[0] == Trade{"A", "C", 5, 23});
    CHECK(r.trades[1] == Trade{"B", "C", 3, 23});
    // Marginal pair (20, 25): 22.5 rounds half up.
    CHECK(r.clearing_price == 23);
    CHECK(r.dso_residual == 0);
    CHECK(r.unmatched_supply == 2);
    CHECK(r.grid == std::vector<GridTrade>{{"B", -2, 5}});
    check_result(r, offers, bids);
}

TEST_CASE("clearing: degenerate books") {
    SUBCASE("bid without offers buys from the dso") {
        auto r = clear_market(3, {}, {bid("C", 4, 25)}, {30, 5});
        CHECK(r.trades.empty());
        CHECK(r.clearing_price == 0);
        CHECK(r.dso_residual == 4);
        CHECK(r.grid == std::vector<GridTrade>{{"C", 4, 30}});
        CHECK(r.interval == 3);
    }
    SUBCASE("equal prices trade at that price") {
        auto r = clear_market(0, {offer("A", 3, 7)}, {bid("C", 3, 7)}, {30, 5});
        REQUIRE(r.trades.size() == 1);
        CHECK(r.trades[0] == Trade{"A", "C", 3, 7});
        CHECK(r.clearing_price == 7);
        CHECK(r.grid.empty());
    }
    SUBCASE("empty book") {
        auto r = clear_market(0, {}, {}, {30, 5});
        CHECK(r.trades.empty());
        CHECK(r.clearing_price == 0);
        CHECK(r.dso_residual == 0);
        CHECK(r.grid.empty());
    }
    SUBCASE("bids below every offer") {
        auto r = clear_market(0, {offer("A", 2, 15)}, {bid("C", 6, 14)}, {30, 5});
        CHECK(r.trades.empty());
        CHECK(r.dso_residual == 6);
        CHECK(r.unmatched_supply == 2);
        CHECK(r.grid == std::vector<GridTrade>{{"C", 6, 30}, {"A", -2, 5}});
    }
    SUBCASE("price ties break by actor name") {
        auto r = clear_market(0, {offer("B", 2, 5), offer("A", 2, 5)}, {bid("C", 2, 9)}, {30, 5});
        REQUIRE(r.trades.size() == 1);
        CHECK(r.trades[0].seller == "A");
        CHECK(r.clearing_price == 7);
    }
}

TEST_CASE("clearing matches the brute-force optimum on random books") {
    std::mt19937 rng(20260101);
    for (int round = 0; round < 300; ++round) {
        int n = 1 + static_cast<int>(rng() % 16);
        std::vector<Order> offers, bids;
        for (int i = 0; i < n; ++i) {
            auto actor = "p" + std::to_string(i);
            std::int64_t q = 1 + rng() % 10, p = 1 + rng() % 20;
            (rng() % 2 ? offers : bids).push_back(rng() % 2 ? offer(actor, q, p) : bid(actor, q, p));
        }
        for (auto& o : offers) o.side = Side::Offer;
        for (auto& b : bids) b.side = Side::Bid;
        auto r = clear_market(0, offers, bids, {30, 5});
        check_result(r, offers, bids);
        if (!r.trades.empty()) {
            std::int64_t max_offer = 0, min_bid = INT64_MAX;
            for (const auto& t : r.trades) {
                for (const auto& o : offers)
                    if (o.actor == t.seller) max_offer = std::max(max_offer, o.unit_price);
                for (const auto& b : bids)
                    if (b.actor == t.buyer) min_bid = std::min(min_bid, b.unit_price);
            }
            CHECK(max_offer <= r.clearing_price);
            CHECK(r.clearing_price <= min_bid);
        }
    }
}

TEST_CASE("clearing result json and digest") {
    auto r = clear_market(5, {offer("A", 5, 10), offer("B", 5, 20)}, {bid("C", 8, 25)}, {30, 5});
    auto back = ClearingResult::from_json(parse_json(canonical(r.to_json())));
    CHECK(back == r);
    CHECK(back.digest() == r.digest());
    CHECK(r.digest() == sha256(canonical(r.to_json())));
    auto altered = r;
    altered.trades[1].quantity = 4;
    CHECK(altered.digest() != r.digest());
    CHECK(error_of([] { ClearingResult::from_json(Json::object()); }) == Errc::MalformedRequest);
    CHECK(error_of([] { Order::from_json(parse_json(R"({"actor":"a","interval":0,"side":"x","quantity":1,"unitPrice":1})")); }) ==
          Errc::MalformedRequest);
}

TEST_CASE("generate_day") {
    auto config = testing::local_config("tesgen", 5);
    auto day = generate_day(11, config);
    REQUIRE(day.size() == 24);
    std::size_t orders = 0;
    for (int h = 0; h < 24; ++h) {
        const auto& book = day[static_cast<std::size_t>(h)];
        CHECK(book.interval == h);
        CHECK(book.offers.size() + book.bids.size() == 5);
        std::set<std::string> actors;
        for (const auto* side : {&book.offers, &book.bids})
            for (const auto& o : *side) {
                actors.insert(o.actor);
                CHECK(o.interval == h);
                CHECK(o.quantity >= 1);
                CHECK(o.quantity <= 10);
                CHECK(o.unit_price >= 1);
                CHECK(o.unit_price <= 20);
                CHECK(o.actor != "dso1");
            }
        CHECK(actors.size() == 5);
        orders += book.offers.size() + book.bids.size();
    }
    CHECK(orders == 120);

    auto same = generate_day(11, config);
    auto other = generate_day(12, config);
    bool all_same = true, any_diff = false;
    for (std::size_t h = 0; h < 24; ++h) {
        all_same = all_same && same[h].offers == day[h].offers && same[h].bids == day[h].bids;
        any_diff = any_diff || other[h].offers != day[h].offers || other[h].bids != day[h].bids;
    }
    CHECK(all_same);
    CHECK(any_diff);
}

TEST_CASE("generate_day golden draws") {
    // Seed 7, two prosumers: values from an independent MT19937-64.
    auto day = generate_day(7, testing::local_config("tesgold", 2));
    CHECK(day[0].bids == std::vector<Order>{{"prosumer1", 0, Side::Bid, 1, 19}});
    CHECK(day[0].offers == std::vector<Order>{{"prosumer2", 0, Side::Offer, 2, 9}});
    CHECK(day[1].bids == std::vector<Order>{{"prosumer1", 1, Side::Bid, 9, 2}});
    CHECK(day[1].offers == std::vector<Order>{{"prosumer2", 1, Side::Offer, 7, 6}});
}

TEST_CASE("fault specs") {
    auto f = FaultSpec::parse("10:prosumer1:stall_mempool");
    CHECK(f.interval == 10);
    CHECK(f.node == "prosumer1");
    CHECK(f.mode == node::FaultMode::StallMempool);
    CHECK(f.str() == "10:prosumer1:stall_mempool");
    CHECK(FaultSpec::parse("0:dso1:unresponsive").mode == node::FaultMode::Unresponsive);
    for (auto bad : {"", "10", "10:x", "24:x:none", "-1:x:none", "a:x:none", "1::none", "1:x:melt"})
        CHECK_MESSAGE(error_of([&] { FaultSpec::parse(bad); }) == Errc::MalformedRequest, bad);
}

TEST_CASE("audit against a chain") {
    DayReport report;
    report.configuration_name = "aud";
    report.seed = 1;
    std::vector<node::Block> chain(1);
    for (int h = 0; h < 3; ++h) {
        IntervalRecord rec;
        rec.interval = h;
        rec.result = clear_market(h, {offer("A", 2 + h, 3)}, {bid("B", 4, 9)}, {30, 5});
        rec.digest = rec.result.digest();
        rec.status = IntervalStatus::Committed;
        node::Transaction tx;
        tx.nonce = h;
        tx.payload_hash = rec.digest;
        tx.seal();
        rec.commit_tx = tx.tx_id;
        if (h != 2) chain[0].transactions.push_back(tx);
        report.intervals.push_back(rec);
    }
    auto results = audit(report, chain);
    REQUIRE(results.size() == 3);
    CHECK(results[0].passed);
    CHECK(results[1].passed);
    CHECK_FALSE(results[2].passed);
    CHECK(results[2].reason == "unmined");

    report.intervals[1].result.clearing_price += 1;
    results = audit(report, chain);
    CHECK(results[0].passed);
    CHECK(results[1].reason == "digest mismatch");

    report.intervals[0].commit_tx.reset();
    CHECK(audit(report, chain)[0].reason == "no commitment recorded");
}

TEST_CASE("day report json") {
    DayReport report;
    report.configuration_name = "rep";
    report.seed = 99;
    IntervalRecord rec;
    rec.interval = 0;
    rec.result = clear_market(0, {offer("A", 2, 3)}, {bid("B", 4, 9)}, {30, 5});
    rec.digest = rec.result.digest();
    rec.chain = sha256("x");
    rec.status = IntervalStatus::Committed;
    rec.commit_tx = sha256("tx");
    rec.settlement_txs = {sha256("s1")};
    rec.commit_height = 12;
    rec.seconds = 0.5;
    report.intervals.push_back(rec);
    report.settlement["A"] = {100, 112, 112};
    report.faults = {"0:A:none"};
    report.recoveries = 2;

    auto j = report.to_json();
    CHECK(j.contains("meta"));
    CHECK_FALSE(report.deterministic_json().contains("meta"));
    auto back = DayReport::from_json(parse_json(canonical(j)));
    CHECK(canonical(back.to_json()) == canonical(j));
    CHECK(back.intervals[0].commit_height == 12);
    CHECK(back.recoveries == 2);

    // Run metadata does not affect the deterministic view.
    back.intervals[0].commit_height = 40;
    back.intervals[0].settlement_txs.clear();
    back.seconds = 7;
    CHECK(back.deterministic_json() == report.deterministic_json());
}

namespace {

struct TesFixture {
    testing::TempDir dir;
    dsl::NetworkConfig config;
    std::unique_ptr<manager::Manager> mgr;

    explicit TesFixture(const std::string& name, int prosumers) : config(testing::local_config(name, prosumers, 100000)) {
        manager::ManagerOptions o;
        o.workspace = dir.path();
        o.block_interval = 100ms;
        mgr = std::make_unique<manager::Manager>(config, o);
        mgr->network_create();
        mgr->start(manager::Targets::Miners);
        mgr->start(manager::Targets::Clients);
        mgr->network_connect();
    }
    ~TesFixture() {
        try {
            mgr->network_stop();
        } catch (const Error&) {
        }
    }

    std::vector<node::Block> miner_chain() {
        node::AdminClient admin(mgr->admin_endpoint(config.miners[0]));
        std::vector<node::Block> out;
        auto h = admin.block_number();
        for (std::int64_t i = 1; i <= h; ++i) out.push_back(admin.get_block(i));
        return out;
    }
};

}  // namespace

TEST_CASE("trading day end to end") {
    TesFixture fx("tesday", 2);
    DayReport report;
    {
        TesNetwork net(*fx.mgr);
        report = run_day(net, 5);
    }
    REQUIRE(report.intervals.size() == 24);
    for (const auto& r : report.intervals) CHECK_MESSAGE(r.status == IntervalStatus::Committed, r.failure);
    CHECK(report.recoveries == 0);

    auto results = audit(report, fx.miner_chain());
    for (const auto& a : results) CHECK_MESSAGE(a.passed, "interval " << a.interval << ": " << a.reason);

    // Balances move exactly by the settled trades and money is conserved.
    std::int64_t before = 0, after = 0;
    for (const auto& [name, s] : report.settlement) {
        CHECK_MESSAGE(s.final_balance == s.expected, name);
        before += s.initial;
        after += s.final_balance;
    }
    CHECK(before == after);

    auto day = generate_day(5, fx.config);
    for (const auto& r : report.intervals) {
        const auto& book = day[static_cast<std::size_t>(r.interval)];
        CHECK(r.result == clear_market(r.interval, book.offers, book.bids, {}));
    }
}

TEST_CASE("trading day survives a stalled prosumer") {
    TesFixture fx("tesstall", 2);
    DayOptions opts;
    opts.faults = {FaultSpec::parse("10:prosumer1:stall_mempool"), FaultSpec::parse("14:dso1:unresponsive")};
    DayReport report;
    {
        TesNetwork net(*fx.mgr);
        report = run_day(net, 5, opts);
    }
    for (const auto& r : report.intervals) CHECK_MESSAGE(r.status == IntervalStatus::Committed, r.failure);
    CHECK(report.recoveries >= 1);
    CHECK(report.faults.size() == 2);
    for (const auto& a : audit(report, fx.miner_chain())) CHECK_MESSAGE(a.passed, a.reason);
}
