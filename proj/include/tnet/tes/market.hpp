/*
 * market.hpp
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

#include <cstdint>
#include <string>
#include <vector>

#include "tnet/digest.hpp"
#include "tnet/dsl/config.hpp"
#include "tnet/json.hpp"

namespace tnet::tes {

inline constexpr int kIntervalsPerDay = 24;

enum class Side { Offer, Bid };

/// One prosumer's order for one hour. Offers sell, bids buy.
struct Order {
    std::string actor;
    int interval = 0;
    Side side = Side::Offer;
    std::int64_t quantity = 0;    // kWh, > 0
    std::int64_t unit_price = 0;  // per kWh, > 0

    Json to_json() const;
    static Order from_json(const Json& j);
    bool operator==(const Order&) const = default;
};

struct OrderBook {
    int interval = 0;
    std::vector<Order> offers;
    std::vector<Order> bids;
};

/// The DSO buys surplus at sell_price and supplies shortfall at buy_price.
struct Tariff {
    std::int64_t buy_price = 30;
    std::int64_t sell_price = 5;
};

struct Trade {
    std::string seller;
    std::string buyer;
    std::int64_t quantity = 0;
    std::int64_t unit_price = 0;
    bool operator==(const Trade&) const = default;
};

/// Energy exchanged with the DSO: positive quantity is bought from it at
/// the tariff buy price, negative is sold to it at the sell price.
struct GridTrade {
    std::string actor;
    std::int64_t quantity = 0;
    std::int64_t unit_price = 0;
    bool operator==(const GridTrade&) const = default;
};

struct ClearingResult {
    int interval = 0;
    std::vector<Trade> trades;
    std::int64_t clearing_price = 0;  // 0 when nothing matched
    /// Demand not met locally, supplied by the DSO.
    std::int64_t dso_residual = 0;
    /// Supply not sold locally, absorbed by the DSO.
    std::int64_t unmatched_supply = 0;
    std::vector<GridTrade> grid;

    std::int64_t matched_quantity() const;
    Json to_json() const;
    static ClearingResult from_json(const Json& j);
    /// sha256 of the canonical JSON form; this is what goes on-chain.
    Digest digest() const;
    bool operator==(const ClearingResult&) const = default;
};

/// 24 order books, one order per prosumer per hour: side, quantity 1-10 and
/// price 1-20 drawn from a 64-bit Mersenne Twister seeded with `seed`.
/// Identical for identical (seed, prosumer names).
std::vector<OrderBook> generate_day(std::uint64_t seed, const dsl::NetworkConfig& config);

/// Uniform-price double auction. Offers ascend and bids descend by price
/// (ties by actor name); units match while bid >= offer. The price is the
/// midpoint of the last matched offer and bid, rounded half up.
ClearingResult clear_market(int interval, std::vector<Order> offers, std::vector<Order> bids, const Tariff& tariff);

}  // namespace tnet::tes
