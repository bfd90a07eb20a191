/*
 * bench.cpp
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

#include "tnet/manager/bench.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tnet/error.hpp"

namespace tnet::manager {

namespace {

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", s);
    return buf;
}

}  // namespace

std::optional<PhaseStats> BenchResult::stats(Phase phase, int prosumers) const {
    std::vector<double> xs;
    for (const auto& r : rows)
        if (r.phase == phase && r.prosumers == prosumers) xs.push_back(r.seconds);
    if (xs.empty()) return std::nullopt;
    PhaseStats s;
    s.samples = static_cast<int>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= s.samples;
    if (s.samples > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / (s.samples - 1));
    }
    return s;
}

std::string BenchResult::raw_csv() const {
    std::ostringstream out;
    out << "phase,node_count,rep,duration_seconds\n";
    for (const auto& r : rows)
        out << phase_label(r.phase) << ',' << r.prosumers << ',' << r.rep << ',' << fmt_seconds(r.seconds) << '\n';
    return out.str();
}

std::string BenchResult::summary_csv() const {
    std::ostringstream out;
    out << "phase";
    for (int c : counts) out << ',' << c << "_avg," << c << "_stddev";
    out << '\n';
    for (auto phase : kAllPhases) {
        out << phase_label(phase);
        for (int c : counts) {
            auto s = stats(phase, c);
            if (s)
                out << ',' << fmt_seconds(s->mean) << ',' << fmt_seconds(s->stddev);
            else
                out << ",,";
        }
        out << '\n';
    }
    return out.str();
}

dsl::NetworkConfig bench_config(const dsl::NetworkConfig& base, int prosumers) {
    if (base.clients.empty()) throw Error(Errc::InvalidConfig, "bench template needs at least one client");
    dsl::NetworkConfig c;
    c.configuration_name = base.configuration_name + "_p" + std::to_string(prosumers);
    c.configuration_version = base.configuration_version;
    c.genesis = base.genesis;
    const auto& host = base.clients.front().host;
    int port = base.clients.front().blockchain_port;
    auto next = [&] {
        if (port > 65535) throw Error(Errc::InvalidConfig, "bench ports run past 65535");
        return static_cast<std::uint16_t>(port++);
    };
    auto client = [&](std::string name, dsl::Role role) {
        dsl::NodeSpec n{std::move(name), role, host, 0, 0, std::nullopt};
        n.blockchain_port = next();
        n.admin_port = next();
        n.wrapper_port = next();
        return n;
    };
    c.clients.push_back(client("dso1", dsl::Role::Dso));
    for (int i = 1; i <= prosumers; ++i) c.clients.push_back(client("prosumer" + std::to_string(i), dsl::Role::Prosumer));
    dsl::NodeSpec miner{"miner1", dsl::Role::Miner, host, 0, 0, std::nullopt};
    miner.blockchain_port = next();
    miner.admin_port = next();
    c.miners.push_back(miner);
    return c;
}

BenchResult run_bench(const dsl::NetworkConfig& base, const std::vector<int>& counts, int repetitions,
                      const ManagerOptions& options, const std::function<void(const BenchRow&)>& on_row) {
    // Each rep starts from a clean slate even if an earlier run left files.
    auto opts = options;
    opts.force = true;
    BenchResult result;
    result.counts = counts;
    result.repetitions = repetitions;
    for (int count : counts) {
        auto config = bench_config(base, count);
        for (int rep = 1; rep <= repetitions; ++rep) {
            Manager mgr(config, opts);
            auto record = [&](const PhaseTiming& t) {
                BenchRow row{t.phase, count, rep, t.seconds};
                result.rows.push_back(row);
                if (on_row) on_row(row);
            };
            try {
                for (const auto& t : mgr.network_create()) record(t);
                record(mgr.start(Targets::Miners));
                record(mgr.start(Targets::Clients));
                record(mgr.network_connect());
                record(mgr.network_stop());
                record(mgr.network_delete());
            } catch (const std::exception& e) {
                result.failed = true;
                result.failure = std::to_string(count) + " prosumers, rep " + std::to_string(rep) + ": " + e.what();
                spdlog::error("bench aborted: {}", result.failure);
                try {
                    mgr.network_stop();
                } catch (const std::exception&) {
                }
                try {
                    mgr.network_delete();
                } catch (const std::exception&) {
                }
                return result;
            }
        }
    }
    return result;
}

}  // namespace tnet::manager
