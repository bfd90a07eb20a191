/*
 * market_oracle.hpp
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

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tnet/tes/market.hpp"

namespace tnet::testing {

/// Largest quantity that can trade when every matched bid price is at least
/// every matched offer price, found by trying every subset of orders.
/// Exponential: meant for books of at most 20 orders.
inline std::int64_t brute_force_max_matched(const std::vector<tes::Order>& offers, const std::vector<tes::Order>& bids) {
    std::vector<const tes::Order*> all;
    for (const auto& o : offers) all.push_back(&o);
    for (const auto& b : bids) all.push_back(&b);
    const auto n = all.size();
    std::int64_t best = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::int64_t supply = 0, demand = 0;
        std::int64_t max_offer = 0, min_bid = INT64_MAX;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1)) continue;
            const auto& o = *all[i];
            if (o.side == tes::Side::Offer) {
                supply += o.quantity;
                max_offer = std::max(max_offer, o.unit_price);
            } else {
                demand += o.quantity;
                min_bid = std::min(min_bid, o.unit_price);
            }
        }
        if (supply == 0 || demand == 0 || max_offer > min_bid) continue;
        best = std::max(best, std::min(supply, demand));
    }
    return best;
}

}  // namespace tnet::testing
