/*
 * test_manager.cpp
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

#include <doctest.h>

#include <fstream>

#include "support/test_support.hpp"
#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/json.hpp"
#include "tnet/manager/bench.hpp"
#include "tnet/manager/manager.hpp"
#include "tnet/node/data_dir.hpp"

using namespace tnet;
using namespace tnet::manager;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

Errc error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

std::string error_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

/// Local executor that corrupts genesis copies for one node.
class CorruptingExecutor : public LocalExecutor {
public:
    explicit CorruptingExecutor(std::string victim) : victim_(std::move(victim)) {}
    void put_file(const std::string& host, const fs::path& local, const fs::path& remote) override {
        LocalExecutor::put_file(host, local, remote);
        if (remote.filename() == "genesis.json" && remote.parent_path().filename() == victim_)
            std::ofstream(remote, std::ios::app) << " ";
    }

private:
    std::string victim_;
};

/// Local executor whose start command always fails.
class NoStartExecutor : public LocalExecutor {
public:
    ExecResult run(const std::string& host, const std::string& command) override {
        if (command.find("--daemonize") != std::string::npos) return {1, "refusing to start"};
        return LocalExecutor::run(host, command);
    }
};

ManagerOptions options_in(const testing::TempDir& dir) {
    ManagerOptions o;
    o.workspace = dir.path();
    o.block_interval = 100ms;
    return o;
}

}  // namespace

TEST_CASE("phase labels follow the timing table") {
    std::vector<std::string> labels;
    for (auto p : kAllPhases) labels.emplace_back(phase_label(p));
    CHECK(labels == std::vector<std::string>{"Clients Create", "Miners Create", "Blockchain Make", "Blockchain Create",
                                             "Distribute to Clients", "Distribute to Miners", "Full Network Created",
                                             "Miner Start", "Clients Start", "Network Connect", "Network Stop",
                                             "Network Delete"});
    CHECK(parse_phase("Network Stop") == Phase::NetworkStop);
    CHECK(parse_phase("ClientsCreate") == Phase::ClientsCreate);
    CHECK_FALSE(parse_phase("nope"));
}

TEST_CASE("invalid configs are refused before any side effect") {
    testing::TempDir dir;
    auto config = testing::local_config("badnet", 2);
    config.clients[1].admin_port = config.clients[0].admin_port;
    CHECK(error_of([&] { Manager(config, options_in(dir)); }) == Errc::InvalidConfig);
    CHECK(fs::is_empty(dir.path()));
}

TEST_CASE("creation phases") {
    testing::TempDir dir;
    auto config = testing::local_config("mgrnet", 2);
    Manager mgr(config, options_in(dir));
    const auto& layout = mgr.layout();

    auto t = mgr.clients_create();
    CHECK(t.phase == Phase::ClientsCreate);
    CHECK(t.node_count == 3);
    for (const auto& c : config.clients) {
        auto m = node::DataDir(layout.node_dir(c.name)).load_manifest();
        CHECK(m.account == genesis::derive_account("mgrnet", c.name));
        CHECK(m.wrapper_port == c.wrapper_port);
    }
    CHECK(error_of([&] { mgr.clients_create(); }) == Errc::AlreadyExists);

    CHECK(error_of([&] { mgr.blockchain_create(); }) == Errc::MissingGenesis);
    CHECK(error_of([&] { mgr.distribute(Targets::Clients); }) == Errc::MissingGenesis);
    CHECK(mgr.miners_create().phase == Phase::MinersCreate);

    mgr.blockchain_make();
    auto bytes = read_file(layout.genesis_path());
    mgr.blockchain_make();
    CHECK(read_file(layout.genesis_path()) == bytes);

    CHECK(mgr.blockchain_create().node_count == 1);
    CHECK(fs::exists(layout.node_dir("miner1") / "chainstore.json"));
    CHECK(fs::exists(layout.node_dir("miner1") / "blocks.log"));
    CHECK(error_of([&] { mgr.blockchain_create(); }) == Errc::AlreadyExists);

    auto d = mgr.distribute(Targets::Clients);
    CHECK(d.phase == Phase::DistributeToClients);
    CHECK(d.node_count == 3);
    for (const auto& c : config.clients) CHECK(read_file(layout.node_dir(c.name) / "genesis.json") == bytes);
    CHECK(mgr.distribute(Targets::Miners).phase == Phase::DistributeToMiners);

    SUBCASE("force re-creates") {
        auto opts = options_in(dir);
        opts.force = true;
        Manager forced(config, opts);
        CHECK_NOTHROW(forced.clients_create());
        CHECK_NOTHROW(forced.blockchain_create());
    }
    SUBCASE("a corrupted copy names the node") {
        auto opts = options_in(dir);
        opts.executor = std::make_shared<CorruptingExecutor>("prosumer2");
        Manager corrupt(config, opts);
        auto text = error_text([&] { corrupt.distribute(Targets::Clients); });
        CHECK(text.find("HashMismatch") == 0);
        CHECK(text.find("prosumer2") != std::string::npos);
    }
    SUBCASE("delete removes the network directory") {
        CHECK(mgr.network_delete().phase == Phase::NetworkDelete);
        CHECK_FALSE(fs::exists(layout.network_dir()));
        CHECK(error_of([&] { mgr.network_delete(); }) == Errc::NotCreated);
    }
}

TEST_CASE("network_create emits seven timings") {
    testing::TempDir dir;
    Manager mgr(testing::local_config("fullnet", 3), options_in(dir));
    auto timings = mgr.network_create();
    REQUIRE(timings.size() == 7);
    std::vector<Phase> phases;
    double sum = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        phases.push_back(timings[i].phase);
        sum += timings[i].seconds;
    }
    CHECK(phases == std::vector<Phase>{Phase::ClientsCreate, Phase::MinersCreate, Phase::BlockchainMake,
                                       Phase::BlockchainCreate, Phase::DistributeToClients, Phase::DistributeToMiners});
    CHECK(timings[6].phase == Phase::FullNetworkCreated);
    CHECK(sum <= timings[6].seconds);
}

TEST_CASE("phase ordering is enforced") {
    testing::TempDir dir;
    Manager mgr(testing::local_config("ordernet", 2), options_in(dir));
    CHECK(error_of([&] { mgr.start(Targets::Miners); }) == Errc::NotCreated);
    mgr.network_create();
    CHECK(error_of([&] { mgr.network_connect(); }) == Errc::NotRunning);
    CHECK(error_of([&] { mgr.network_stop(); }) == Errc::NotRunning);
}

TEST_CASE("unreachable ssh host is an executor failure naming the host") {
    testing::TempDir dir;
    auto config = testing::local_config("sshnet", 1);
    for (auto& c : config.clients) c.host = "unreachable.invalid";
    auto opts = options_in(dir);
    opts.executor = std::make_shared<SshExecutor>(std::vector<std::string>{"-o", "StrictHostKeyChecking=no"},
                                                  std::chrono::seconds(2));
    Manager mgr(config, opts);
    auto text = error_text([&] { mgr.clients_create(); });
    CHECK(text.find("ExecutorFailure") == 0);
    CHECK(text.find("unreachable.invalid") != std::string::npos);
}

TEST_CASE("full lifecycle forms a star and tears down") {
    testing::TempDir dir;
    auto config = testing::local_config("starnet", 5);
    Manager mgr(config, options_in(dir));
    mgr.network_create();
    CHECK(mgr.start(Targets::Miners).phase == Phase::MinerStart);
    CHECK(mgr.start(Targets::Clients).node_count == 6);
    CHECK(mgr.network_connect().phase == Phase::NetworkConnect);
    for (const auto& s : mgr.status()) {
        CHECK(s.running);
        CHECK(s.peers == (s.role == dsl::Role::Miner ? 6u : 1u));
    }
    CHECK(error_of([&] { mgr.network_delete(); }) == Errc::AlreadyExists);
    auto stop = mgr.network_stop();
    CHECK(stop.node_count == 7);
    REQUIRE(mgr.stop_latencies().size() == 7);
    for (const auto& l : mgr.stop_latencies()) CHECK(l.graceful);
    for (const auto* n : config.all_nodes()) CHECK_FALSE(port_open(mgr.admin_endpoint(*n)));
    mgr.network_delete();
    CHECK_FALSE(fs::exists(mgr.layout().network_dir()));
}

TEST_CASE("restart over an existing workspace keeps the chain") {
    testing::TempDir dir;
    auto config = testing::local_config("again", 1);
    Manager mgr(config, options_in(dir));
    mgr.network_create();
    mgr.start(Targets::Miners);
    auto admin = node::AdminClient(mgr.admin_endpoint(config.miners[0]));
    REQUIRE(testing::wait_until([&] { return admin.block_number() >= 3; }, 5s));
    mgr.network_stop();
    auto height = static_cast<std::int64_t>(node::DataDir(mgr.layout().node_dir("miner1")).load_blocks().size());
    // A second manager process works from the files alone.
    Manager fresh(config, options_in(dir));
    fresh.start(Targets::Miners);
    CHECK(admin.block_number() >= height);
    fresh.network_stop();
}

TEST_CASE("bench layout and failure flag") {
    testing::TempDir dir;
    auto base = testing::local_config("bench", 1);
    base.clients[0].blockchain_port = testing::port_block(3 * 6);

    SUBCASE("bench_config shape") {
        auto c = bench_config(base, 5);
        CHECK(c.clients.size() == 6);
        CHECK(c.miners.size() == 1);
        CHECK(dsl::validate(c).deployable());
    }
    SUBCASE("two counts, two reps") {
        auto r = run_bench(base, {2, 3}, 2, options_in(dir));
        REQUIRE_FALSE(r.failed);
        CHECK(r.rows.size() == 2 * 2 * 12);
        auto summary = r.summary_csv();
        std::istringstream in(summary);
        std::string line;
        std::getline(in, line);
        CHECK(line == "phase,2_avg,2_stddev,3_avg,3_stddev");
        int rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 12);
        CHECK(r.raw_csv().rfind("phase,node_count,rep,duration_seconds\n", 0) == 0);
    }
    SUBCASE("one rep has zero stddev") {
        auto r = run_bench(base, {2}, 1, options_in(dir));
        REQUIRE_FALSE(r.failed);
        for (auto p : kAllPhases) CHECK(r.stats(p, 2)->stddev == 0);
    }
    SUBCASE("an induced failure is flagged with partial rows") {
        auto opts = options_in(dir);
        opts.executor = std::make_shared<NoStartExecutor>();
        auto r = run_bench(base, {2}, 1, opts);
        CHECK(r.failed);
        CHECK(r.rows.size() == 7);
        CHECK(r.failure.find("refusing to start") != std::string::npos);
    }
}
