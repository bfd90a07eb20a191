/*
 * market.cpp
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

#include "tnet/tes/market.hpp"

#include <algorithm>
#include <random>
#include <tuple>

#include "tnet/error.hpp"

namespace tnet::tes {

Json Order::to_json() const {
    return {{"actor", actor},
            {"interval", interval},
            {"side", side == Side::Offer ? "offer" : "bid"},
            {"quantity", quantity},
            {"unitPrice", unit_price}};
}

Order Order::from_json(const Json& j) {
    Order o;
    try {
        o.actor = j.at("actor").get<std::string>();
        o.interval = j.at("interval").get<int>();
        auto side = j.at("side").get<std::string>();
        if (side != "offer" && side != "bid") throw Error(Errc::MalformedRequest, "order side \"" + side + "\"");
        o.side = side == "offer" ? Side::Offer : Side::Bid;
        o.quantity = j.at("quantity").get<std::int64_t>();
        o.unit_price = j.at("unitPrice").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRequest, std::string("order: ") + e.what());
    }
    return o;
}

std::int64_t ClearingResult::matched_quantity() const {
    std::int64_t q = 0;
    for (const auto& t : trades) q += t.quantity;
    return q;
}

Json ClearingResult::to_json() const {
    Json trades_json = Json::array();
    for (const auto& t : trades)
        trades_json.push_back(
            {{"seller", t.seller}, {"buyer", t.buyer}, {"quantity", t.quantity}, {"unitPrice", t.unit_price}});
    Json grid_json = Json::array();
    for (const auto& g : grid)
        grid_json.push_back({{"actor", g.actor}, {"quantity", g.quantity}, {"unitPrice", g.unit_price}});
    return {{"interval", interval},
            {"trades", trades_json},
            {"clearingPrice", clearing_price},
            {"dsoResidual", dso_residual},
            {"unmatchedSupply", unmatched_supply},
            {"grid", grid_json}};
}

ClearingResult ClearingResult::from_json(const Json& j) {
    ClearingResult r;
    try {
        r.interval = j.at("interval").get<int>();
        for (const auto& t : j.at("trades"))
            r.trades.push_back({t.at("seller").get<std::string>(), t.at("buyer").get<std::string>(),
                                t.at("quantity").get<std::int64_t>(), t.at("unitPrice").get<std::int64_t>()});
        r.clearing_price = j.at("clearingPrice").get<std::int64_t>();
        r.dso_residual = j.at("dsoResidual").get<std::int64_t>();
        r.unmatched_supply = j.at("unmatchedSupply").get<std::int64_t>();
        for (const auto& g : j.at("grid"))
            r.grid.push_back({g.at("actor").get<std::string>(), g.at("quantity").get<std::int64_t>(),
                              g.at("unitPrice").get<std::int64_t>()});
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRequest, std::string("clearing result: ") + e.what());
    }
    return r;
}

Digest ClearingResult::digest() const { return sha256(canonical(to_json())); }

std::vector<OrderBook> generate_day(std::uint64_t seed, const dsl::NetworkConfig& config) {
    // Raw engine output with modulo keeps the draw identical on every
    // standard library (distributions are implementation-defined).
    std::mt19937_64 rng(seed);
    std::vector<OrderBook> day;
    for (int h = 0; h < kIntervalsPerDay; ++h) {
        OrderBook book;
        book.interval = h;
        for (const auto& c : config.clients) {
            if (c.role != dsl::Role::Prosumer) continue;
            Order o;
            o.actor = c.name;
            o.interval = h;
            o.side = rng() % 2 == 0 ? Side::Offer : Side::Bid;
            o.quantity = 1 + static_cast<std::int64_t>(rng() % 10);
            o.unit_price = 1 + static_cast<std::int64_t>(rng() % 20);
            (o.side == Side::Offer ? book.offers : book.bids).push_back(o);
        }
        day.push_back(std::move(book));
    }
    return day;
}

ClearingResult clear_market(int interval, std::vector<Order> offers, std::vector<Order> bids, const Tariff& tariff) {
    std::stable_sort(offers.begin(), offers.end(), [](const Order& a, const Order& b) {
        return std::tie(a.unit_price, a.actor) < std::tie(b.unit_price, b.actor);
    });
    std::stable_sort(bids.begin(), bids.end(), [](const Order& a, const Order& b) {
        if (a.unit_price != b.unit_price) return a.unit_price > b.unit_price;
        return a.actor < b.actor;
    });

    ClearingResult r;
    r.interval = interval;
    std::vector<std::int64_t> offer_left, bid_left;
    for (const auto& o : offers) offer_left.push_back(o.quantity);
    for (const auto& b : bids) bid_left.push_back(b.quantity);

    std::size_t i = 0, j = 0;
    std::int64_t marginal_offer = 0, marginal_bid = 0;
    while (i < offers.size() && j < bids.size() && bids[j].unit_price >= offers[i].unit_price) {
        auto q = std::min(offer_left[i], bid_left[j]);
        if (q > 0) {
            r.trades.push_back({offers[i].actor, bids[j].actor, q, 0});
            marginal_offer = offers[i].unit_price;
            marginal_bid = bids[j].unit_price;
        }
        offer_left[i] -= q;
        bid_left[j] -= q;
        if (offer_left[i] == 0) ++i;
        if (bid_left[j] == 0) ++j;
    }
    if (!r.trades.empty()) r.clearing_price = (marginal_offer + marginal_bid + 1) / 2;
    for (auto& t : r.trades) t.unit_price = r.clearing_price;

    for (std::size_t k = 0; k < bids.size(); ++k) {
        if (bid_left[k] == 0) continue;
        r.dso_residual += bid_left[k];
        r.grid.push_back({bids[k].actor, bid_left[k], tariff.buy_price});
    }
    for (std::size_t k = 0; k < offers.size(); ++k) {
        if (offer_left[k] == 0) continue;
        r.unmatched_supply += offer_left[k];
        r.grid.push_back({offers[k].actor, -offer_left[k], tariff.sell_price});
    }
    return r;
}

}  // namespace tnet::tes
