/*
 * day.cpp
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

#include "tnet/tes/day.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <thread>

#include <spdlog/spdlog.h>

#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"

namespace tnet::tes {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::string_view kOrderKind = "order";
constexpr std::string_view kResultKind = "clearing_result";

bool unreachable(Errc code) {
    return code == Errc::Timeout || code == Errc::NodeUnresponsive || code == Errc::ConnectionRefused;
}

Digest chain_step(const Digest& prev, const Digest& next) {
    Sha256 h;
    h.update(prev.bytes());
    h.update(next.bytes());
    return h.finish();
}

// Builds and submits a transfer, riding out a node that is down or being
// restarted. A submission the node did not answer stays pending in the
// wrapper's journal and is resubmitted by recovery.
Digest submit_transfer(actor::Wrapper& w, const AccountId& to, std::int64_t value, std::optional<Digest> payload,
                       Clock::time_point deadline) {
    for (;;) {
        node::Transaction tx;
        try {
            tx = w.make_transaction(to, value, payload);
        } catch (const Error& e) {
            if (!unreachable(e.code()) || Clock::now() >= deadline) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            continue;
        }
        try {
            return w.submit(tx);
        } catch (const Error& e) {
            if (!unreachable(e.code())) throw;
            return tx.tx_id;
        }
    }
}

bool all_mined(actor::Wrapper& w, const std::vector<Digest>& ids) {
    for (const auto& id : ids) {
        auto e = w.journal().find(id);
        if (!e || e->status != actor::JournalStatus::Mined) return false;
    }
    return true;
}

const char* status_name(IntervalStatus s) { return s == IntervalStatus::Committed ? "committed" : "failed"; }

Json hex_list(const std::vector<Digest>& ids) {
    Json out = Json::array();
    for (const auto& id : ids) out.push_back(id.hex());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FaultSpec

FaultSpec FaultSpec::parse(std::string_view text) {
    auto a = text.find(':');
    auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
    if (b == std::string_view::npos)
        throw Error(Errc::MalformedRequest, "fault \"" + std::string(text) + "\" is not interval:node:mode");
    FaultSpec f;
    auto num = text.substr(0, a);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), f.interval);
    if (ec != std::errc() || ptr != num.data() + num.size() || f.interval < 0 || f.interval >= kIntervalsPerDay)
        throw Error(Errc::MalformedRequest, "fault interval \"" + std::string(num) + "\" is not 0-23");
    f.node = std::string(text.substr(a + 1, b - a - 1));
    if (f.node.empty()) throw Error(Errc::MalformedRequest, "fault names no node");
    f.mode = node::parse_fault(text.substr(b + 1));
    return f;
}

std::string FaultSpec::str() const {
    return std::to_string(interval) + ":" + node + ":" + std::string(node::fault_name(mode));
}

// ---------------------------------------------------------------------------
// DayReport

Digest DayReport::digest_chain() const { return intervals.empty() ? Digest::zero() : intervals.back().chain; }

bool DayReport::all_committed() const {
    return std::all_of(intervals.begin(), intervals.end(),
                       [](const IntervalRecord& r) { return r.status == IntervalStatus::Committed; });
}

Json DayReport::deterministic_json() const {
    Json ivs = Json::array();
    for (const auto& r : intervals) {
        ivs.push_back({{"interval", r.interval},
                       {"result", r.result.to_json()},
                       {"digest", r.digest.hex()},
                       {"chain", r.chain.hex()},
                       {"status", status_name(r.status)},
                       {"commitTxId", r.commit_tx ? Json(r.commit_tx->hex()) : Json(nullptr)},
                       {"failure", r.failure}});
    }
    Json accounts = Json::object();
    for (const auto& [name, s] : settlement)
        accounts[name] = {{"initial", s.initial}, {"expected", s.expected}, {"final", s.final_balance}};
    return {{"configurationName", configuration_name},
            {"seed", seed},
            {"tariff", {{"buyPrice", tariff.buy_price}, {"sellPrice", tariff.sell_price}}},
            {"intervals", ivs},
            {"digestChain", digest_chain().hex()},
            {"settlement", accounts}};
}

Json DayReport::to_json() const {
    Json j = deterministic_json();
    Json per = Json::array();
    for (const auto& r : intervals)
        per.push_back({{"interval", r.interval},
                       {"commitHeight", r.commit_height ? Json(*r.commit_height) : Json(nullptr)},
                       {"settlementTxIds", hex_list(r.settlement_txs)},
                       {"seconds", r.seconds}});
    j["meta"] = {{"intervals", per}, {"faults", faults}, {"recoveries", recoveries}, {"seconds", seconds}};
    return j;
}

DayReport DayReport::from_json(const Json& j) {
    DayReport d;
    try {
        d.configuration_name = j.at("configurationName").get<std::string>();
        d.seed = j.at("seed").get<std::uint64_t>();
        d.tariff.buy_price = j.at("tariff").at("buyPrice").get<std::int64_t>();
        d.tariff.sell_price = j.at("tariff").at("sellPrice").get<std::int64_t>();
        for (const auto& iv : j.at("intervals")) {
            IntervalRecord r;
            r.interval = iv.at("interval").get<int>();
            r.result = ClearingResult::from_json(iv.at("result"));
            r.digest = Digest::from_hex(iv.at("digest").get<std::string>());
            r.chain = Digest::from_hex(iv.at("chain").get<std::string>());
            r.status = iv.at("status").get<std::string>() == "committed" ? IntervalStatus::Committed
                                                                         : IntervalStatus::Failed;
            if (!iv.at("commitTxId").is_null()) r.commit_tx = Digest::from_hex(iv.at("commitTxId").get<std::string>());
            r.failure = iv.at("failure").get<std::string>();
            d.intervals.push_back(std::move(r));
        }
        for (const auto& [name, s] : j.at("settlement").items())
            d.settlement[name] = {s.at("initial").get<std::int64_t>(), s.at("expected").get<std::int64_t>(),
                                  s.at("final").get<std::int64_t>()};
        if (j.contains("meta")) {
            const auto& meta = j.at("meta");
            for (const auto& f : meta.value("faults", Json::array())) d.faults.push_back(f.get<std::string>());
            d.recoveries = meta.value("recoveries", 0);
            d.seconds = meta.value("seconds", 0.0);
            for (const auto& m : meta.value("intervals", Json::array())) {
                auto k = m.at("interval").get<int>();
                if (k < 0 || static_cast<std::size_t>(k) >= d.intervals.size()) continue;
                auto& r = d.intervals[static_cast<std::size_t>(k)];
                if (!m.at("commitHeight").is_null()) r.commit_height = m.at("commitHeight").get<std::int64_t>();
                for (const auto& id : m.at("settlementTxIds"))
                    r.settlement_txs.push_back(Digest::from_hex(id.get<std::string>()));
                r.seconds = m.value("seconds", 0.0);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaError, std::string("day report: ") + e.what());
    }
    return d;
}

// ---------------------------------------------------------------------------
// TesNetwork

TesNetwork::TesNetwork(manager::Manager& manager, std::chrono::milliseconds poll_period) : manager_(manager) {
    const auto& cfg = manager_.config();
    for (const auto& c : cfg.clients) {
        if (c.role == dsl::Role::Dso && dso_name_.empty()) dso_name_ = c.name;
        if (c.role == dsl::Role::Prosumer) prosumers_.push_back(c.name);
    }
    if (dso_name_.empty()) throw Error(Errc::InvalidConfig, "configuration has no dso client");
    if (prosumers_.empty()) throw Error(Errc::InvalidConfig, "configuration has no prosumer clients");

    for (const auto& c : cfg.clients) {
        if (c.role != dsl::Role::Dso && c.role != dsl::Role::Prosumer) continue;
        if (c.role == dsl::Role::Dso && c.name != dso_name_) continue;
        actor::WrapperOptions o;
        o.name = c.name;
        o.account = account(c.name);
        o.admin = manager_.admin_endpoint(c);
        o.data_dir = manager_.layout().node_dir(c.name);
        o.wrapper_port = c.wrapper_port.value_or(0);
        o.poll_period = poll_period;
        const dsl::NodeSpec* spec = &c;
        o.launch = [this, spec] { manager_.start_node(*spec); };
        o.kill = [this, spec] { manager_.kill_node(*spec); };
        auto w = actor::Wrapper::attach(std::move(o));
        auto name = c.name;
        if (c.role == dsl::Role::Dso) {
            w->on_message([this](const actor::OffchainMessage& m) {
                if (m.kind != kOrderKind) return;
                try {
                    auto order = Order::from_json(parse_json(m.payload));
                    std::lock_guard lock(mu_);
                    orders_[order.interval].emplace(order.actor, order);
                } catch (const Error& e) {
                    spdlog::warn("dso dropped order {}: {}", m.msg_id, e.what());
                    return;
                }
                cv_.notify_all();
            });
        } else {
            w->on_message([this, name](const actor::OffchainMessage& m) {
                if (m.kind != kResultKind) return;
                try {
                    auto interval = parse_json(m.payload).at("interval").get<int>();
                    std::lock_guard lock(mu_);
                    results_[name][interval] = m.payload;
                } catch (const std::exception& e) {
                    spdlog::warn("{} dropped result {}: {}", name, m.msg_id, e.what());
                    return;
                }
                cv_.notify_all();
            });
        }
        wrappers_.emplace(c.name, std::move(w));
    }
}

TesNetwork::~TesNetwork() {
    for (auto& [name, w] : wrappers_) w->detach();
}

Endpoint TesNetwork::wrapper_endpoint(const std::string& name) const {
    const auto& spec = dsl::node_lookup(manager_.config(), name);
    auto ep = manager_.wrapper_endpoint(spec);
    if (!ep) throw Error(Errc::InvalidConfig, name + " has no wrapper port");
    return {ep->host, wrappers_.at(name)->wrapper_port()};
}

AccountId TesNetwork::account(const std::string& name) const {
    return genesis::derive_account(manager_.config().configuration_name, name);
}

int TesNetwork::recoveries() const {
    int n = 0;
    for (const auto& [name, w] : wrappers_) n += w->recoveries();
    return n;
}

std::map<std::string, Order> TesNetwork::orders(int interval) {
    std::lock_guard lock(mu_);
    return orders_[interval];
}

std::optional<std::string> TesNetwork::result_for(const std::string& prosumer, int interval) {
    std::lock_guard lock(mu_);
    auto it = results_[prosumer].find(interval);
    if (it == results_[prosumer].end()) return std::nullopt;
    return it->second;
}

bool TesNetwork::wait_orders(int interval, std::size_t count, std::chrono::milliseconds deadline) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, deadline, [&] { return orders_[interval].size() >= count; });
}

bool TesNetwork::wait_results(int interval, std::chrono::milliseconds deadline) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, deadline, [&] {
        for (const auto& p : prosumers_)
            if (!results_[p].count(interval)) return false;
        return true;
    });
}

// ---------------------------------------------------------------------------
// run_day

namespace {

struct IntervalRun {
    TesNetwork& net;
    const DayOptions& options;
    const std::vector<OrderBook>& day;
    std::atomic<bool>& recovery_failed;
};

void wait_until(const std::function<bool()>& done, Clock::time_point deadline, std::chrono::milliseconds poll,
                const std::atomic<bool>& abort, const std::string& what) {
    while (!done()) {
        if (abort) throw Error(Errc::RecoveryFailed, what + " abandoned after a failed recovery");
        if (Clock::now() >= deadline) throw Error(Errc::Timeout, what + " not mined before the interval deadline");
        std::this_thread::sleep_for(poll);
    }
}

void trade_interval(IntervalRun& run, int h, IntervalRecord& rec) {
    auto& net = run.net;
    const auto deadline = Clock::now() + run.options.interval_deadline;
    const auto budget = run.options.interval_deadline;
    const auto& book = run.day[static_cast<std::size_t>(h)];

    // Orders go off-chain to the DSO concurrently.
    auto dso_ep = net.wrapper_endpoint(net.dso_name());
    std::vector<Order> all = book.offers;
    all.insert(all.end(), book.bids.begin(), book.bids.end());
    std::vector<std::thread> senders;
    std::mutex err_mu;
    std::optional<Error> send_error;
    for (const auto& o : all) {
        senders.emplace_back([&, o] {
            try {
                net.wrapper(o.actor).send_offchain(dso_ep, std::string(kOrderKind), canonical(o.to_json()));
            } catch (const Error& e) {
                std::lock_guard lock(err_mu);
                if (!send_error) send_error = e;
            }
        });
    }
    for (auto& t : senders) t.join();
    if (send_error) throw *send_error;
    if (!net.wait_orders(h, all.size(), budget)) throw Error(Errc::Timeout, "dso did not receive every order");

    // The DSO clears what it received.
    std::vector<Order> offers, bids;
    for (const auto& [actor, o] : net.orders(h)) (o.side == Side::Offer ? offers : bids).push_back(o);
    rec.result = clear_market(h, offers, bids, run.options.tariff);
    rec.digest = rec.result.digest();

    // Commitment on-chain, full result off-chain.
    auto& dso = net.dso();
    auto payload = canonical(rec.result.to_json());
    auto dso_account = net.account(net.dso_name());
    auto commit = submit_transfer(dso, dso_account, 0, sha256(payload), deadline);
    rec.commit_tx = commit;
    for (const auto& p : net.prosumers())
        actor::send_offchain(net.wrapper_endpoint(p), actor::OffchainMessage{commit.hex(), std::string(kResultKind), payload});
    if (!net.wait_results(h, budget)) throw Error(Errc::Timeout, "a prosumer did not receive the result");
    wait_until([&] { return all_mined(dso, {commit}); }, deadline, run.options.poll_period, run.recovery_failed,
               "commitment");
    if (auto e = dso.journal().find(commit)) rec.commit_height = e->mined_height;

    // Each prosumer checks the result it received against its own chain
    // before paying anything.
    for (const auto& p : net.prosumers()) {
        auto received = *net.result_for(p, h);
        wait_until([&] {
            try {
                return actor::verify_private_payload(net.wrapper(p).admin(), commit, received);
            } catch (const Error&) {
                return false;
            }
        }, deadline, run.options.poll_period, run.recovery_failed, "commitment on " + p);
    }

    // Settlement.
    std::map<std::string, std::vector<Digest>> submitted;
    for (const auto& t : rec.result.trades)
        submitted[t.buyer].push_back(
            submit_transfer(net.wrapper(t.buyer), net.account(t.seller), t.quantity * t.unit_price, std::nullopt, deadline));
    for (const auto& g : rec.result.grid) {
        if (g.quantity > 0)
            submitted[g.actor].push_back(
                submit_transfer(net.wrapper(g.actor), dso_account, g.quantity * g.unit_price, std::nullopt, deadline));
        else
            submitted[net.dso_name()].push_back(
                submit_transfer(dso, net.account(g.actor), -g.quantity * g.unit_price, std::nullopt, deadline));
    }
    for (const auto& [party, ids] : submitted) {
        wait_until([&] { return all_mined(net.wrapper(party), ids); }, deadline, run.options.poll_period,
                   run.recovery_failed, "settlement of " + party);
        rec.settlement_txs.insert(rec.settlement_txs.end(), ids.begin(), ids.end());
    }
}

void apply_settlement(const ClearingResult& r, const std::string& dso,
                      std::map<std::string, AccountSettlement>& s) {
    for (const auto& t : r.trades) {
        s[t.buyer].expected -= t.quantity * t.unit_price;
        s[t.seller].expected += t.quantity * t.unit_price;
    }
    for (const auto& g : r.grid) {
        s[g.actor].expected -= g.quantity * g.unit_price;
        s[dso].expected += g.quantity * g.unit_price;
    }
}

}  // namespace

DayReport run_day(TesNetwork& net, std::uint64_t seed, const DayOptions& options) {
    const auto started = Clock::now();
    DayReport report;
    report.configuration_name = net.config().configuration_name;
    report.seed = seed;
    report.tariff = options.tariff;
    for (const auto& f : options.faults) report.faults.push_back(f.str());
    const int recoveries_before = net.recoveries();

    std::vector<std::string> parties = net.prosumers();
    parties.push_back(net.dso_name());
    for (const auto& p : parties) {
        auto bal = net.wrapper(p).admin().get_balance(net.account(p));
        report.settlement[p] = {bal, bal, 0};
    }

    std::atomic<bool> recovery_failed{false};
    std::vector<std::pair<std::string, actor::SubscriptionId>> subs;
    for (const auto& p : parties) {
        subs.emplace_back(p, net.wrapper(p).subscribe(actor::kind_is(actor::EventKind::RecoveryFailed),
                                                      [&recovery_failed](const actor::NodeEvent&) {
                                                          recovery_failed = true;
                                                      }));
    }

    auto day = generate_day(seed, net.config());
    IntervalRun run{net, options, day, recovery_failed};
    Digest chain = Digest::zero();
    for (int h = 0; h < kIntervalsPerDay; ++h) {
        IntervalRecord rec;
        rec.interval = h;
        auto t0 = Clock::now();
        recovery_failed = false;
        try {
            for (const auto& f : options.faults) {
                if (f.interval != h) continue;
                spdlog::info("interval {}: injecting {} on {}", h, node::fault_name(f.mode), f.node);
                const auto& spec = dsl::node_lookup(net.config(), f.node);
                node::AdminClient(net.manager().admin_endpoint(spec)).set_fault(f.mode);
            }
            trade_interval(run, h, rec);
            if (recovery_failed) throw Error(Errc::RecoveryFailed, "a node failed recovery during the interval");
            rec.status = IntervalStatus::Committed;
            apply_settlement(rec.result, net.dso_name(), report.settlement);
        } catch (const Error& e) {
            rec.status = IntervalStatus::Failed;
            rec.failure = e.what();
            spdlog::warn("interval {} failed: {}", h, e.what());
        }
        if (rec.digest.is_zero()) rec.digest = rec.result.digest();
        chain = chain_step(chain, rec.digest);
        rec.chain = chain;
        rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        spdlog::info("interval {}: {} price {} matched {} residual {}", h, status_name(rec.status),
                     rec.result.clearing_price, rec.result.matched_quantity(), rec.result.dso_residual);
        report.intervals.push_back(std::move(rec));
    }

    for (auto& [p, id] : subs) net.wrapper(p).unsubscribe(id);
    for (const auto& p : parties) {
        try {
            report.settlement[p].final_balance = net.wrapper(p).admin().get_balance(net.account(p));
        } catch (const Error& e) {
            spdlog::warn("final balance of {} unavailable: {}", p, e.what());
        }
    }
    report.recoveries = net.recoveries() - recoveries_before;
    report.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return report;
}

// ---------------------------------------------------------------------------
// audit

std::vector<IntervalAudit> audit(const DayReport& report, const std::vector<node::Block>& chain) {
    std::map<Digest, const node::Transaction*> mined;
    for (const auto& b : chain)
        for (const auto& tx : b.transactions) mined.emplace(tx.tx_id, &tx);

    std::vector<IntervalAudit> out;
    for (const auto& r : report.intervals) {
        IntervalAudit a;
        a.interval = r.interval;
        auto it = r.commit_tx ? mined.find(*r.commit_tx) : mined.end();
        if (!r.commit_tx) {
            a.reason = "no commitment recorded";
        } else if (it == mined.end()) {
            a.reason = "unmined";
        } else if (!it->second->payload_hash) {
            a.reason = "commitment carries no payload hash";
        } else if (*it->second->payload_hash != r.result.digest()) {
            a.reason = "digest mismatch";
        }
        a.passed = a.reason.empty();
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace tnet::tes
