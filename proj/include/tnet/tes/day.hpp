/*
 * day.hpp
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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tnet/actor/wrapper.hpp"
#include "tnet/manager/manager.hpp"
#include "tnet/node/types.hpp"
#include "tnet/tes/market.hpp"

namespace tnet::tes {

/// "interval:node:mode", e.g. "10:prosumer1:stall_mempool". The fault is set
/// on the node's admin interface when the interval begins.
struct FaultSpec {
    int interval = 0;
    std::string node;
    node::FaultMode mode = node::FaultMode::None;

    /// Throws Error(MalformedRequest).
    static FaultSpec parse(std::string_view text);
    std::string str() const;
};

enum class IntervalStatus { Committed, Failed };

struct IntervalRecord {
    int interval = 0;
    ClearingResult result;
    Digest digest;
    /// Running hash: sha256(previous chain value || digest), from zero.
    Digest chain;
    IntervalStatus status = IntervalStatus::Failed;
    std::optional<Digest> commit_tx;
    std::vector<Digest> settlement_txs;
    std::string failure;
    // Run metadata, not part of the deterministic view.
    std::optional<std::int64_t> commit_height;
    double seconds = 0;
};

struct AccountSettlement {
    std::int64_t initial = 0;
    std::int64_t expected = 0;  // initial plus the settled trades
    std::int64_t final_balance = 0;
};

struct DayReport {
    std::string configuration_name;
    std::uint64_t seed = 0;
    Tariff tariff;
    std::vector<IntervalRecord> intervals;
    std::map<std::string, AccountSettlement> settlement;
    std::vector<std::string> faults;
    int recoveries = 0;
    double seconds = 0;

    Digest digest_chain() const;
    bool all_committed() const;

    /// Full report: the deterministic fields plus a "meta" object holding
    /// heights, timings and recovery counts.
    Json to_json() const;
    /// to_json() without "meta".
    Json deterministic_json() const;
    static DayReport from_json(const Json& j);
};

struct DayOptions {
    Tariff tariff;
    std::vector<FaultSpec> faults;
    /// Time allowed for an interval's commitment and settlements to be mined.
    std::chrono::milliseconds interval_deadline{60000};
    std::chrono::milliseconds poll_period{200};
};

/// Wrappers for the DSO and every prosumer of a running, connected network.
/// Recovery restarts nodes through the manager.
class TesNetwork {
public:
    TesNetwork(manager::Manager& manager, std::chrono::milliseconds poll_period = std::chrono::milliseconds(200));
    ~TesNetwork();
    TesNetwork(const TesNetwork&) = delete;
    TesNetwork& operator=(const TesNetwork&) = delete;

    const dsl::NetworkConfig& config() const { return manager_.config(); }
    manager::Manager& manager() { return manager_; }
    actor::Wrapper& dso() { return *wrappers_.at(dso_name_); }
    const std::string& dso_name() const { return dso_name_; }
    const std::vector<std::string>& prosumers() const { return prosumers_; }
    actor::Wrapper& wrapper(const std::string& name) { return *wrappers_.at(name); }
    Endpoint wrapper_endpoint(const std::string& name) const;
    AccountId account(const std::string& name) const;
    int recoveries() const;

    /// Orders the DSO received for an interval, keyed by actor.
    std::map<std::string, Order> orders(int interval);
    /// Clearing result payload a prosumer received for an interval.
    std::optional<std::string> result_for(const std::string& prosumer, int interval);
    bool wait_orders(int interval, std::size_t count, std::chrono::milliseconds deadline);
    bool wait_results(int interval, std::chrono::milliseconds deadline);

private:
    manager::Manager& manager_;
    std::string dso_name_;
    std::vector<std::string> prosumers_;
    std::map<std::string, std::unique_ptr<actor::Wrapper>> wrappers_;

    std::mutex mu_;
    std::condition_variable cv_;
    std::map<int, std::map<std::string, Order>> orders_;
    std::map<std::string, std::map<int, std::string>> results_;
};

/// Trades one day: per interval, orders go off-chain to the DSO, the DSO
/// clears, commits sha256 of the result on-chain and sends the result to
/// every prosumer, and the parties settle on-chain. An interval whose
/// transactions are not mined by the deadline, or during which a node fails
/// recovery, is marked failed and the day continues.
DayReport run_day(TesNetwork& network, std::uint64_t seed, const DayOptions& options = {});

struct IntervalAudit {
    int interval = 0;
    bool passed = false;
    std::string reason;  // empty when passed
};

/// Checks each interval's result against the chain: the commitment tx must
/// be in a block and its payload_hash must equal sha256 of the canonical
/// result.
std::vector<IntervalAudit> audit(const DayReport& report, const std::vector<node::Block>& chain);

}  // namespace tnet::tes
