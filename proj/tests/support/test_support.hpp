/*
 * test_support.hpp
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
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "tnet/dsl/config.hpp"
#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/net.hpp"
#include "tnet/node/admin_client.hpp"
#include "tnet/node/control.hpp"
#include "tnet/node/data_dir.hpp"

namespace tnet::testing {

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "tnet-test") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline bool wait_until(const std::function<bool()>& pred,
                       std::chrono::milliseconds timeout = std::chrono::milliseconds(10000),
                       std::chrono::milliseconds step = std::chrono::milliseconds(10)) {
    auto until = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < until) {
        if (pred()) return true;
        std::this_thread::sleep_for(step);
    }
    return pred();
}

/// First port of a run of `count` ports that could all be bound just now.
/// Runs come from below the kernel's ephemeral range so outgoing
/// connections never hold them.
inline std::uint16_t port_block(int count = 1) {
    constexpr int kLow = 20000, kHigh = 32000;
    static std::mutex mu;
    static int next = kLow + static_cast<int>(::getpid() * 131 % (kHigh - kLow));
    std::lock_guard lock(mu);
    for (int tries = 0; tries < kHigh - kLow; ++tries) {
        if (next + count > kHigh) next = kLow;
        int base = next;
        bool ok = true;
        for (int p = base; p < base + count && ok; ++p) {
            try {
                Socket::listen(static_cast<std::uint16_t>(p));
            } catch (const Error&) {
                ok = false;
                next = p + 1;
            }
        }
        if (ok) {
            next = base + count;
            return static_cast<std::uint16_t>(base);
        }
    }
    throw Error(Errc::PortInUse, "no free port block of " + std::to_string(count));
}

/// A localhost network with `prosumers` prosumers, one dso, one miner, all
/// on ports that were free when it was built.
inline dsl::NetworkConfig local_config(const std::string& name, int prosumers, std::int64_t balance = 1000,
                                       std::int64_t gas_limit = 30000, std::int64_t difficulty = 400) {
    dsl::NetworkConfig c;
    c.configuration_name = name;
    c.configuration_version = "1";
    c.genesis = {5871, difficulty, gas_limit, balance};
    auto client = [&](const std::string& n, dsl::Role role) {
        return dsl::NodeSpec{n, role, "127.0.0.1", port_block(), port_block(), port_block()};
    };
    c.clients.push_back(client("dso1", dsl::Role::Dso));
    for (int i = 1; i <= prosumers; ++i) c.clients.push_back(client("prosumer" + std::to_string(i), dsl::Role::Prosumer));
    c.miners.push_back(dsl::NodeSpec{"miner1", dsl::Role::Miner, "127.0.0.1", port_block(), port_block(), std::nullopt});
    return c;
}

/// Node data directories for a config, run as real chainnode processes.
/// Every node still running is killed on destruction.
class ProcessNet {
public:
    explicit ProcessNet(dsl::NetworkConfig config, std::chrono::milliseconds block_interval = std::chrono::milliseconds(100))
        : config_(std::move(config)), genesis_(genesis::make_genesis(config_)) {
        for (const auto* spec : config_.all_nodes()) {
            node::NodeManifest m;
            m.name = spec->name;
            m.role = spec->role;
            m.account = account(spec->name);
            m.host = spec->host;
            m.blockchain_port = spec->blockchain_port;
            m.admin_port = spec->admin_port;
            m.wrapper_port = spec->wrapper_port;
            m.block_interval = block_interval;
            std::filesystem::create_directories(data_dir(spec->name));
            node::DataDir(data_dir(spec->name)).save_manifest(m);
            genesis::write_genesis(genesis_, data_dir(spec->name) / "genesis.json");
        }
    }
    ~ProcessNet() {
        for (const auto* spec : config_.all_nodes()) node::stop_node(admin_endpoint(spec->name), data_dir(spec->name), std::chrono::milliseconds(2000));
    }
    ProcessNet(const ProcessNet&) = delete;
    ProcessNet& operator=(const ProcessNet&) = delete;

    const dsl::NetworkConfig& config() const { return config_; }
    const genesis::GenesisDocument& genesis() const { return genesis_; }
    std::filesystem::path data_dir(const std::string& name) const { return dir_.path() / name; }
    AccountId account(const std::string& name) const { return genesis::derive_account(config_.configuration_name, name); }
    Endpoint admin_endpoint(const std::string& name) const { return {"127.0.0.1", dsl::node_lookup(config_, name).admin_port}; }
    Endpoint peer_endpoint(const std::string& name) const { return {"127.0.0.1", dsl::node_lookup(config_, name).blockchain_port}; }
    node::AdminClient admin(const std::string& name) const { return node::AdminClient(admin_endpoint(name)); }

    void launch(const std::string& name) const { node::launch_local(node::default_node_binary(), data_dir(name)); }
    void launch_all() const {
        for (const auto* spec : config_.all_nodes()) launch(spec->name);
    }
    /// Star: every client peers with every miner.
    void connect_all() const {
        for (const auto& c : config_.clients)
            for (const auto& m : config_.miners) admin(c.name).add_peer(peer_endpoint(m.name));
    }

private:
    dsl::NetworkConfig config_;
    genesis::GenesisDocument genesis_;
    TempDir dir_{"tnet-procnet"};
};

}  // namespace tnet::testing
