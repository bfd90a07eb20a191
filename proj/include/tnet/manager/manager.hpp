/*
 * manager.hpp
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
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnet/dsl/config.hpp"
#include "tnet/manager/executor.hpp"
#include "tnet/net.hpp"

namespace tnet::manager {

enum class Phase {
    ClientsCreate,
    MinersCreate,
    BlockchainMake,
    BlockchainCreate,
    DistributeToClients,
    DistributeToMiners,
    FullNetworkCreated,
    MinerStart,
    ClientsStart,
    NetworkConnect,
    NetworkStop,
    NetworkDelete,
};

inline constexpr Phase kAllPhases[] = {
    Phase::ClientsCreate,       Phase::MinersCreate,       Phase::BlockchainMake, Phase::BlockchainCreate,
    Phase::DistributeToClients, Phase::DistributeToMiners, Phase::FullNetworkCreated, Phase::MinerStart,
    Phase::ClientsStart,        Phase::NetworkConnect,     Phase::NetworkStop,    Phase::NetworkDelete,
};

/// Row label as printed in timing tables ("Clients Create", ...).
std::string_view phase_label(Phase phase);
/// Accepts the label or the enumerator name.
std::optional<Phase> parse_phase(std::string_view text);

struct PhaseTiming {
    Phase phase;
    double seconds = 0;
    int node_count = 0;  // nodes the phase acted on
};

enum class Targets { Clients, Miners };

/// Paths of a network's files. A node's directory is
/// root/<configurationName>/<node>; the genesis document made from the
/// configuration lives at root/<configurationName>/genesis.json.
struct WorkspaceLayout {
    std::filesystem::path root;
    std::string configuration_name;

    std::filesystem::path network_dir() const { return root / configuration_name; }
    std::filesystem::path genesis_path() const { return network_dir() / "genesis.json"; }
    std::filesystem::path node_dir(std::string_view node) const { return network_dir() / std::string(node); }
};

struct ManagerOptions {
    std::filesystem::path workspace = "workspace";
    std::shared_ptr<Executor> executor = std::make_shared<LocalExecutor>();
    /// Re-create over existing directories instead of failing.
    bool force = false;
    /// Run per-node operations of one phase concurrently.
    bool parallel = false;
    /// chainnode binary path on the node hosts.
    std::filesystem::path node_binary;
    std::chrono::milliseconds stop_grace{5000};
    std::chrono::milliseconds block_interval{200};
};

struct StopLatency {
    std::string node;
    double seconds = 0;
    bool graceful = false;
    bool was_running = false;
};

struct NodeState {
    std::string name;
    dsl::Role role;
    bool created = false;
    bool running = false;
    std::int64_t height = 0;
    std::size_t peers = 0;
    std::vector<std::string> peer_names;
};

/// Drives a network's lifecycle from its configuration. Holds no state of
/// its own: every decision is made from the configuration and what is on
/// disk or listening.
class Manager {
public:
    /// Throws Error(InvalidConfig) if the configuration does not validate.
    Manager(dsl::NetworkConfig config, ManagerOptions options);

    const dsl::NetworkConfig& config() const { return config_; }
    const WorkspaceLayout& layout() const { return layout_; }
    const ManagerOptions& options() const { return options_; }

    PhaseTiming clients_create();
    PhaseTiming miners_create();
    PhaseTiming blockchain_make();
    PhaseTiming blockchain_create();
    PhaseTiming distribute(Targets targets);
    /// The six creation phases in order, then FullNetworkCreated.
    std::vector<PhaseTiming> network_create();

    PhaseTiming start(Targets targets);
    /// Starts one created node (used by start() and by wrapper recovery).
    void start_node(const dsl::NodeSpec& node);
    /// SIGKILLs one node through the executor.
    void kill_node(const dsl::NodeSpec& node);
    PhaseTiming network_connect();
    PhaseTiming network_stop();
    PhaseTiming network_delete();

    std::vector<NodeState> status() const;
    /// Per-node results of the last network_stop().
    const std::vector<StopLatency>& stop_latencies() const { return stop_latencies_; }

    Endpoint admin_endpoint(const dsl::NodeSpec& node) const;
    Endpoint peer_endpoint(const dsl::NodeSpec& node) const;
    std::optional<Endpoint> wrapper_endpoint(const dsl::NodeSpec& node) const;

private:
    PhaseTiming create_nodes(const std::vector<const dsl::NodeSpec*>& nodes, Phase phase);
    void run_for_each(const std::vector<const dsl::NodeSpec*>& nodes,
                      const std::function<void(const dsl::NodeSpec&)>& fn) const;
    std::vector<const dsl::NodeSpec*> targets(Targets t) const;
    bool node_created(const dsl::NodeSpec& node) const;

    dsl::NetworkConfig config_;
    ManagerOptions options_;
    WorkspaceLayout layout_;
    std::vector<StopLatency> stop_latencies_;
};

}  // namespace tnet::manager
