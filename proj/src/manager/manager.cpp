/*
 * manager.cpp
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

#include "tnet/manager/manager.hpp"

#include <spdlog/spdlog.h>

#include <exception>
#include <random>
#include <set>
#include <thread>

#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/json.hpp"
#include "tnet/node/admin_client.hpp"
#include "tnet/node/control.hpp"
#include "tnet/node/data_dir.hpp"
#include "tnet/process.hpp"

namespace fs = std::filesystem;

namespace tnet::manager {

using Clock = std::chrono::steady_clock;

namespace {

struct PhaseLabel {
    Phase phase;
    std::string_view label;
    std::string_view name;
};

constexpr PhaseLabel kLabels[] = {
    {Phase::ClientsCreate, "Clients Create", "ClientsCreate"},
    {Phase::MinersCreate, "Miners Create", "MinersCreate"},
    {Phase::BlockchainMake, "Blockchain Make", "BlockchainMake"},
    {Phase::BlockchainCreate, "Blockchain Create", "BlockchainCreate"},
    {Phase::DistributeToClients, "Distribute to Clients", "DistributeToClients"},
    {Phase::DistributeToMiners, "Distribute to Miners", "DistributeToMiners"},
    {Phase::FullNetworkCreated, "Full Network Created", "FullNetworkCreated"},
    {Phase::MinerStart, "Miner Start", "MinerStart"},
    {Phase::ClientsStart, "Clients Start", "ClientsStart"},
    {Phase::NetworkConnect, "Network Connect", "NetworkConnect"},
    {Phase::NetworkStop, "Network Stop", "NetworkStop"},
    {Phase::NetworkDelete, "Network Delete", "NetworkDelete"},
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string q(const fs::path& p) { return shell_quote(p.string()); }

/// Local scratch file removed on scope exit.
class ScratchFile {
public:
    explicit ScratchFile(const std::string& contents) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("tnet-stage-" + std::to_string(rd()) + std::to_string(rd()));
        write_file_atomic(path_, contents);
    }
    ~ScratchFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

}  // namespace

std::string_view phase_label(Phase phase) {
    for (const auto& l : kLabels)
        if (l.phase == phase) return l.label;
    return "?";
}

std::optional<Phase> parse_phase(std::string_view text) {
    for (const auto& l : kLabels)
        if (l.label == text || l.name == text) return l.phase;
    return std::nullopt;
}

Manager::Manager(dsl::NetworkConfig config, ManagerOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
    auto report = dsl::validate(config_);
    if (!report.deployable()) {
        const auto& first = report.errors.front();
        throw Error(Errc::InvalidConfig, first.code + ": " + first.message);
    }
    if (!options_.executor) options_.executor = std::make_shared<LocalExecutor>();
    if (options_.node_binary.empty()) options_.node_binary = node::default_node_binary();
    layout_ = WorkspaceLayout{fs::absolute(options_.workspace), config_.configuration_name};
}

Endpoint Manager::admin_endpoint(const dsl::NodeSpec& node) const {
    return {options_.executor->address(node.host), node.admin_port};
}

Endpoint Manager::peer_endpoint(const dsl::NodeSpec& node) const {
    return {options_.executor->address(node.host), node.blockchain_port};
}

std::optional<Endpoint> Manager::wrapper_endpoint(const dsl::NodeSpec& node) const {
    if (!node.wrapper_port) return std::nullopt;
    return Endpoint{options_.executor->address(node.host), *node.wrapper_port};
}

std::vector<const dsl::NodeSpec*> Manager::targets(Targets t) const {
    std::vector<const dsl::NodeSpec*> out;
    for (const auto& n : t == Targets::Clients ? config_.clients : config_.miners) out.push_back(&n);
    return out;
}

void Manager::run_for_each(const std::vector<const dsl::NodeSpec*>& nodes,
                           const std::function<void(const dsl::NodeSpec&)>& fn) const {
    if (!options_.parallel || nodes.size() < 2) {
        for (const auto* n : nodes) fn(*n);
        return;
    }
    std::vector<std::exception_ptr> errors(nodes.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        threads.emplace_back([&, i] {
            try {
                fn(*nodes[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

bool Manager::node_created(const dsl::NodeSpec& node) const {
    auto dir = layout_.node_dir(node.name);
    return options_.executor->run(node.host, "test -f " + q(dir / "node.json") + " && test -f " + q(dir / "genesis.json"))
               .exit_status == 0;
}

// ---------------------------------------------------------------------------
// Creation

PhaseTiming Manager::create_nodes(const std::vector<const dsl::NodeSpec*>& nodes, Phase phase) {
    auto t0 = Clock::now();
    auto& exec = *options_.executor;
    if (!options_.force) {
        for (const auto* n : nodes) {
            auto manifest = layout_.node_dir(n->name) / "node.json";
            if (exec.run(n->host, "test -e " + q(manifest)).exit_status == 0)
                throw Error(Errc::AlreadyExists, n->name + " already exists in " + layout_.node_dir(n->name).string() +
                                                     " (use --force to re-create)");
        }
    }
    run_for_each(nodes, [&](const dsl::NodeSpec& n) {
        auto dir = layout_.node_dir(n.name);
        std::string prep = options_.force ? "rm -rf " + q(dir) + " && mkdir -p " + q(dir) : "mkdir -p " + q(dir);
        exec.run_checked(n.host, prep);
        node::NodeManifest m;
        m.name = n.name;
        m.role = n.role;
        m.account = genesis::derive_account(config_.configuration_name, n.name);
        m.host = exec.address(n.host);
        m.blockchain_port = n.blockchain_port;
        m.admin_port = n.admin_port;
        m.wrapper_port = n.wrapper_port;
        m.block_interval = options_.block_interval;
        ScratchFile staged(canonical(m.to_json()) + "\n");
        exec.put_file(n.host, staged.path(), dir / "node.json");
    });
    auto secs = seconds_since(t0);
    spdlog::info("{}: {} node(s) in {:.3f}s", phase_label(phase), nodes.size(), secs);
    return {phase, secs, static_cast<int>(nodes.size())};
}

PhaseTiming Manager::clients_create() { return create_nodes(targets(Targets::Clients), Phase::ClientsCreate); }

PhaseTiming Manager::miners_create() { return create_nodes(targets(Targets::Miners), Phase::MinersCreate); }

PhaseTiming Manager::blockchain_make() {
    auto t0 = Clock::now();
    auto expected = genesis::make_genesis(config_).genesis_hash;
    fs::create_directories(layout_.network_dir());
    // The node software's own genesis tool writes the file, as a node host
    // would; the manager then checks it against its own computation.
    ScratchFile staged(dsl::serialize_config(config_));
    auto r = run_process({options_.node_binary.string(), "--make-genesis", staged.path().string(), "--out",
                          layout_.genesis_path().string()},
                         std::chrono::seconds(60));
    if (r.exit_status != 0) throw Error(Errc::ExecutorFailure, "genesis tool failed: " + r.output);
    auto written = genesis::read_genesis(layout_.genesis_path());
    if (written.genesis_hash != expected)
        throw Error(Errc::HashMismatch, "genesis tool produced " + written.genesis_hash.hex() + ", expected " +
                                            expected.hex());
    auto secs = seconds_since(t0);
    spdlog::info("Blockchain Make: genesis {} in {:.3f}s", expected.hex(), secs);
    return {Phase::BlockchainMake, secs, 0};
}

PhaseTiming Manager::blockchain_create() {
    auto t0 = Clock::now();
    auto& exec = *options_.executor;
    if (!fs::exists(layout_.genesis_path()))
        throw Error(Errc::MissingGenesis, "no genesis at " + layout_.genesis_path().string() + " (run blockchain-make)");
    auto miners = targets(Targets::Miners);
    for (const auto* m : miners) {
        auto store = layout_.node_dir(m->name) / "chainstore.json";
        if (exec.run(m->host, "test -e " + q(layout_.node_dir(m->name) / "node.json")).exit_status != 0)
            throw Error(Errc::NotCreated, m->name + " has not been created");
        if (!options_.force && exec.run(m->host, "test -e " + q(store)).exit_status == 0)
            throw Error(Errc::AlreadyExists, m->name + " chain store already initialized (use --force)");
    }
    run_for_each(miners, [&](const dsl::NodeSpec& m) {
        auto dir = layout_.node_dir(m.name);
        if (options_.force)
            exec.run_checked(m.host, "rm -f " + q(dir / "chainstore.json") + " " + q(dir / "blocks.log") + " " +
                                         q(dir / "mempool.json") + " " + q(dir / "genesis.json"));
        exec.put_file(m.host, layout_.genesis_path(), dir / "genesis.json");
        exec.run_checked(m.host, q(options_.node_binary) + " --datadir " + q(dir) + " --genesis " +
                                     q(dir / "genesis.json") + " --init");
    });
    auto secs = seconds_since(t0);
    spdlog::info("Blockchain Create: {} miner store(s) in {:.3f}s", miners.size(), secs);
    return {Phase::BlockchainCreate, secs, static_cast<int>(miners.size())};
}

PhaseTiming Manager::distribute(Targets which) {
    auto t0 = Clock::now();
    auto phase = which == Targets::Clients ? Phase::DistributeToClients : Phase::DistributeToMiners;
    auto& exec = *options_.executor;
    if (!fs::exists(layout_.genesis_path()))
        throw Error(Errc::MissingGenesis, "no genesis at " + layout_.genesis_path().string() + " (run blockchain-make)");
    auto expected = sha256(read_file(layout_.genesis_path())).hex();
    auto nodes = targets(which);
    run_for_each(nodes, [&](const dsl::NodeSpec& n) {
        auto remote = layout_.node_dir(n.name) / "genesis.json";
        exec.put_file(n.host, layout_.genesis_path(), remote);
        auto out = exec.run_checked(n.host, "sha256sum " + q(remote));
        auto got = out.substr(0, out.find_first_of(" \t\n"));
        if (got != expected)
            throw Error(Errc::HashMismatch, n.name + ": genesis copy digest " + got + ", expected " + expected);
    });
    auto secs = seconds_since(t0);
    spdlog::info("{}: {} verified cop{} in {:.3f}s", phase_label(phase), nodes.size(), nodes.size() == 1 ? "y" : "ies",
                 secs);
    return {phase, secs, static_cast<int>(nodes.size())};
}

std::vector<PhaseTiming> Manager::network_create() {
    auto t0 = Clock::now();
    std::vector<PhaseTiming> out;
    out.push_back(clients_create());
    out.push_back(miners_create());
    out.push_back(blockchain_make());
    out.push_back(blockchain_create());
    out.push_back(distribute(Targets::Clients));
    out.push_back(distribute(Targets::Miners));
    out.push_back({Phase::FullNetworkCreated, seconds_since(t0),
                   static_cast<int>(config_.clients.size() + config_.miners.size())});
    return out;
}

// ---------------------------------------------------------------------------
// Running

PhaseTiming Manager::start(Targets which) {
    auto t0 = Clock::now();
    auto phase = which == Targets::Clients ? Phase::ClientsStart : Phase::MinerStart;
    auto nodes = targets(which);
    for (const auto* n : nodes)
        if (!node_created(*n)) throw Error(Errc::NotCreated, n->name + " has not been created and given a genesis");
    run_for_each(nodes, [&](const dsl::NodeSpec& n) { start_node(n); });
    auto secs = seconds_since(t0);
    spdlog::info("{}: {} node(s) in {:.3f}s", phase_label(phase), nodes.size(), secs);
    return {phase, secs, static_cast<int>(nodes.size())};
}

void Manager::start_node(const dsl::NodeSpec& n) {
    auto r = options_.executor->run(n.host, node::start_command(options_.node_binary, layout_.node_dir(n.name)));
    if (r.exit_status == 0) return;
    // The daemon reports "<ErrcName>: message".
    auto colon = r.output.find(':');
    Errc code = colon == std::string::npos ? Errc::Internal : errc_from_name(r.output.substr(0, colon));
    if (code == Errc::Internal) code = Errc::ExecutorFailure;
    throw Error(code, n.name + ": start failed: " + r.output);
}

void Manager::kill_node(const dsl::NodeSpec& n) {
    auto pid_file = layout_.node_dir(n.name) / "node.pid";
    options_.executor->run(n.host, "kill -9 $(cat " + q(pid_file) + ") 2>/dev/null");
}

PhaseTiming Manager::network_connect() {
    auto t0 = Clock::now();
    for (const auto* n : config_.all_nodes())
        if (!port_open(admin_endpoint(*n))) throw Error(Errc::NotRunning, n->name + " is not running");
    run_for_each(targets(Targets::Clients), [&](const dsl::NodeSpec& c) {
        node::AdminClient admin(admin_endpoint(c), Millis(5000));
        for (const auto& m : config_.miners) admin.add_peer(peer_endpoint(m));
    });
    auto secs = seconds_since(t0);
    spdlog::info("Network Connect: {} client(s) to {} miner(s) in {:.3f}s", config_.clients.size(),
                 config_.miners.size(), secs);
    return {Phase::NetworkConnect, secs, static_cast<int>(config_.clients.size())};
}

PhaseTiming Manager::network_stop() {
    auto t0 = Clock::now();
    auto nodes = config_.all_nodes();
    std::vector<StopLatency> latencies(nodes.size());
    std::mutex mu;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]->name] = i;
    run_for_each(nodes, [&](const dsl::NodeSpec& n) {
        auto s0 = Clock::now();
        StopLatency lat{n.name};
        auto admin = admin_endpoint(n);
        if (port_open(admin)) {
            lat.was_running = true;
            try {
                node::AdminClient(admin, options_.stop_grace).stop();
            } catch (const Error&) {
            }
            auto left = options_.stop_grace - std::chrono::duration_cast<Millis>(Clock::now() - s0);
            if (left.count() > 0 && node::wait_port_closed(admin, left)) {
                lat.graceful = true;
            } else {
                kill_node(n);
                node::wait_port_closed(admin, Millis(5000));
                spdlog::warn("{} did not stop within {} ms; killed", n.name, options_.stop_grace.count());
            }
        }
        lat.seconds = seconds_since(s0);
        std::lock_guard lock(mu);
        latencies[index[n.name]] = lat;
    });
    stop_latencies_ = latencies;
    std::size_t running = 0;
    for (const auto& l : latencies) {
        if (!l.was_running) continue;
        ++running;
        spdlog::info("stopped {} in {:.3f}s{}", l.node, l.seconds, l.graceful ? "" : " (killed)");
    }
    if (running == 0) throw Error(Errc::NotRunning, "no node of " + config_.configuration_name + " is running");
    auto secs = seconds_since(t0);
    spdlog::info("Network Stop: {} node(s) in {:.3f}s", running, secs);
    return {Phase::NetworkStop, secs, static_cast<int>(running)};
}

PhaseTiming Manager::network_delete() {
    auto t0 = Clock::now();
    auto& exec = *options_.executor;
    for (const auto* n : config_.all_nodes())
        if (port_open(admin_endpoint(*n), Millis(100)))
            throw Error(Errc::AlreadyExists, n->name + " is still running; stop the network first");
    std::set<std::string> hosts;
    for (const auto* n : config_.all_nodes()) hosts.insert(n->host);
    bool existed = fs::exists(layout_.network_dir());
    for (const auto& host : hosts) {
        if (exec.run(host, "test -d " + q(layout_.network_dir())).exit_status == 0) existed = true;
        exec.run_checked(host, "rm -rf " + q(layout_.network_dir()));
    }
    std::error_code ec;
    fs::remove_all(layout_.network_dir(), ec);
    if (!existed) throw Error(Errc::NotCreated, "nothing to delete at " + layout_.network_dir().string());
    auto secs = seconds_since(t0);
    spdlog::info("Network Delete: {} in {:.3f}s", layout_.network_dir().string(), secs);
    return {Phase::NetworkDelete, secs, static_cast<int>(config_.clients.size() + config_.miners.size())};
}

std::vector<NodeState> Manager::status() const {
    std::vector<NodeState> out;
    for (const auto* n : config_.all_nodes()) {
        NodeState s;
        s.name = n->name;
        s.role = n->role;
        s.created = node_created(*n);
        try {
            auto st = node::AdminClient(admin_endpoint(*n), Millis(1000)).status();
            s.running = true;
            s.height = st.height;
            s.peers = st.peers;
            s.peer_names = st.peer_names;
        } catch (const Error&) {
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace tnet::manager
