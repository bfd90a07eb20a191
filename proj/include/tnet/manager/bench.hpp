/*
 * bench.hpp
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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tnet/manager/manager.hpp"

namespace tnet::manager {

struct BenchRow {
    Phase phase;
    int prosumers = 0;
    int rep = 0;  // 1-based
    double seconds = 0;
};

struct PhaseStats {
    double mean = 0;
    double stddev = 0;  // sample standard deviation; 0 for a single rep
    int samples = 0;
};

struct BenchResult {
    std::vector<int> counts;
    int repetitions = 0;
    std::vector<BenchRow> rows;
    bool failed = false;
    std::string failure;

    std::optional<PhaseStats> stats(Phase phase, int prosumers) const;
    /// phase,node_count,rep,duration_seconds
    std::string raw_csv() const;
    /// One row per phase; an avg and stddev column per prosumer count.
    std::string summary_csv() const;
};

/// A network of `prosumers` prosumers, one dso and one miner shaped after
/// `base`: same name prefix, genesis and first host. Ports are assigned
/// upward from the first client's blockchainPort.
dsl::NetworkConfig bench_config(const dsl::NetworkConfig& base, int prosumers);

/// Runs the whole lifecycle (create, start miners, start clients, connect,
/// stop, delete) `repetitions` times for each prosumer count. Stops at the
/// first failure, cleans up what it can and returns the rows gathered so
/// far with `failed` set.
BenchResult run_bench(const dsl::NetworkConfig& base, const std::vector<int>& counts, int repetitions,
                      const ManagerOptions& options,
                      const std::function<void(const BenchRow&)>& on_row = nullptr);

}  // namespace tnet::manager
