/*
 * netmgr.cpp
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

// netmgr: lifecycle, benchmark, trading-day and audit commands for a test
// network described by a configuration file.

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <sstream>

#include "tnet/dsl/config.hpp"
#include "tnet/error.hpp"
#include "tnet/json.hpp"
#include "tnet/manager/bench.hpp"
#include "tnet/manager/manager.hpp"
#include "tnet/node/admin_client.hpp"
#include "tnet/node/data_dir.hpp"
#include "tnet/tes/day.hpp"

namespace {

using namespace tnet;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitExecution = 2;
constexpr int kExitUsage = 64;

struct Args {
    std::string command;
    std::string config;
    std::string workspace = "workspace";
    std::string executor = "local";
    bool force = false;
    bool parallel = false;
    std::string csv;
    std::string json;
    std::string node_binary;
    int block_interval_ms = 200;
    bool verbose = false;
    // bench
    std::vector<int> counts{2, 5, 10, 20};
    int reps = 5;
    std::string summary_csv;
    // run-tes
    std::uint64_t seed = 1;
    std::vector<std::string> faults;
    // run-tes output, audit input
    std::string report;
    // audit
    std::string node;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_for(Errc code) {
    switch (code) {
        case Errc::SyntaxError:
        case Errc::SchemaError:
        case Errc::InvalidConfig:
        case Errc::NotFound: return kExitValidation;
        default: return kExitExecution;
    }
}

void write_output(const std::string& path, std::string_view text) {
    if (path.empty()) return;
    write_file_atomic(path, text);
    spdlog::info("wrote {}", path);
}

manager::ManagerOptions manager_options(const Args& a) {
    manager::ManagerOptions o;
    o.workspace = a.workspace;
    o.executor = manager::make_executor(a.executor);
    o.force = a.force;
    o.parallel = a.parallel;
    if (!a.node_binary.empty()) o.node_binary = a.node_binary;
    o.block_interval = std::chrono::milliseconds(a.block_interval_ms);
    return o;
}

std::string timings_csv(const std::vector<manager::PhaseTiming>& timings) {
    std::string out = "phase,node_count,rep,duration_seconds\n";
    for (const auto& t : timings)
        out += fmt::format("{},{},1,{:.6f}\n", manager::phase_label(t.phase), t.node_count, t.seconds);
    return out;
}

Json timings_json(const std::string& command, const std::vector<manager::PhaseTiming>& timings) {
    Json phases = Json::array();
    for (const auto& t : timings)
        phases.push_back({{"phase", manager::phase_label(t.phase)}, {"nodeCount", t.node_count}, {"seconds", t.seconds}});
    return {{"command", command}, {"phases", phases}};
}

void print_timings(const std::vector<manager::PhaseTiming>& timings) {
    for (const auto& t : timings)
        std::cout << fmt::format("{:<22} {:>9.3f} s  ({} node{})\n", manager::phase_label(t.phase), t.seconds,
                                 t.node_count, t.node_count == 1 ? "" : "s");
}

// ---------------------------------------------------------------------------

int cmd_validate(const Args& a, const dsl::NetworkConfig& config) {
    auto report = dsl::validate(config);
    auto issues = [](const std::vector<dsl::Issue>& list) {
        Json out = Json::array();
        for (const auto& i : list) out.push_back({{"code", i.code}, {"message", i.message}, {"nodes", i.nodes}});
        return out;
    };
    for (const auto& e : report.errors) std::cout << "error   " << e.code << ": " << e.message << "\n";
    for (const auto& w : report.warnings) std::cout << "warning " << w.code << ": " << w.message << "\n";
    std::cout << config.configuration_name << ": " << (report.deployable() ? "valid" : "invalid") << " ("
              << report.errors.size() << " error(s), " << report.warnings.size() << " warning(s))\n";
    write_output(a.json, canonical({{"configurationName", config.configuration_name},
                                    {"deployable", report.deployable()},
                                    {"errors", issues(report.errors)},
                                    {"warnings", issues(report.warnings)}}));
    return report.deployable() ? kExitOk : kExitValidation;
}

int cmd_lifecycle(const Args& a, const dsl::NetworkConfig& config) {
    using manager::Targets;
    manager::Manager mgr(config, manager_options(a));
    std::vector<manager::PhaseTiming> timings;
    const auto& c = a.command;
    if (c == "clients-create") timings.push_back(mgr.clients_create());
    else if (c == "miners-create") timings.push_back(mgr.miners_create());
    else if (c == "blockchain-make") timings.push_back(mgr.blockchain_make());
    else if (c == "blockchain-create") timings.push_back(mgr.blockchain_create());
    else if (c == "distribute-clients") timings.push_back(mgr.distribute(Targets::Clients));
    else if (c == "distribute-miners") timings.push_back(mgr.distribute(Targets::Miners));
    else if (c == "create") timings = mgr.network_create();
    else if (c == "start-miners") timings.push_back(mgr.start(Targets::Miners));
    else if (c == "start-clients") timings.push_back(mgr.start(Targets::Clients));
    else if (c == "connect") timings.push_back(mgr.network_connect());
    else if (c == "stop") timings.push_back(mgr.network_stop());
    else if (c == "delete") timings.push_back(mgr.network_delete());

    print_timings(timings);
    if (c == "stop") {
        for (const auto& s : mgr.stop_latencies())
            if (s.was_running)
                std::cout << fmt::format("  {:<20} {:>7.3f} s  {}\n", s.node, s.seconds,
                                         s.graceful ? "stopped" : "killed");
    }
    write_output(a.csv, timings_csv(timings));
    write_output(a.json, canonical(timings_json(c, timings)));
    return kExitOk;
}

int cmd_bench(const Args& a, const dsl::NetworkConfig& config) {
    if (a.reps < 1) throw Error(Errc::InvalidConfig, "--reps must be at least 1");
    for (int n : a.counts)
        if (n < 1) throw Error(Errc::InvalidConfig, "prosumer counts must be positive");
    auto result = manager::run_bench(config, a.counts, a.reps, manager_options(a), [](const manager::BenchRow& r) {
        spdlog::info("{} prosumers rep {}: {} {:.3f} s", r.prosumers, r.rep, manager::phase_label(r.phase), r.seconds);
    });

    std::cout << fmt::format("{:<22}", "phase");
    for (int n : a.counts) std::cout << fmt::format(" {:>19}", fmt::format("{} prosumers", n));
    std::cout << "\n";
    for (auto p : manager::kAllPhases) {
        std::cout << fmt::format("{:<22}", manager::phase_label(p));
        for (int n : a.counts) {
            auto s = result.stats(p, n);
            std::cout << (s ? fmt::format(" {:>9.4f} ±{:>8.4f}", s->mean, s->stddev) : fmt::format(" {:>19}", "-"));
        }
        std::cout << "\n";
    }
    write_output(a.csv, result.raw_csv());
    write_output(a.summary_csv, result.summary_csv());
    if (!a.json.empty()) {
        Json stats = Json::array();
        for (auto p : manager::kAllPhases)
            for (int n : a.counts)
                if (auto s = result.stats(p, n))
                    stats.push_back({{"phase", manager::phase_label(p)},
                                     {"prosumers", n},
                                     {"mean", s->mean},
                                     {"stddev", s->stddev},
                                     {"samples", s->samples}});
        write_output(a.json, canonical({{"counts", a.counts},
                                        {"repetitions", a.reps},
                                        {"failed", result.failed},
                                        {"failure", result.failure},
                                        {"stats", stats}}));
    }
    if (result.failed) {
        std::cerr << "bench failed: " << result.failure << "\n";
        return kExitExecution;
    }
    return kExitOk;
}

int cmd_run_tes(const Args& a, const dsl::NetworkConfig& config) {
    tes::DayOptions day_options;
    for (const auto& f : a.faults) {
        try {
            day_options.faults.push_back(tes::FaultSpec::parse(f));
        } catch (const Error& e) {
            throw UsageError("--fault: " + e.detail());
        }
    }
    for (const auto& f : day_options.faults) dsl::node_lookup(config, f.node);

    auto opts = manager_options(a);
    // Every run trades on a fresh chain.
    opts.force = true;
    manager::Manager mgr(config, opts);
    std::string report_path =
        a.report.empty() ? (mgr.layout().network_dir() / "day-report.json").string() : a.report;

    std::vector<manager::PhaseTiming> timings = mgr.network_create();
    timings.push_back(mgr.start(manager::Targets::Miners));
    timings.push_back(mgr.start(manager::Targets::Clients));
    timings.push_back(mgr.network_connect());

    tes::DayReport report;
    try {
        tes::TesNetwork net(mgr);
        report = tes::run_day(net, a.seed, day_options);
    } catch (...) {
        try {
            mgr.network_stop();
        } catch (const Error&) {
        }
        throw;
    }
    timings.push_back(mgr.network_stop());

    std::cout << fmt::format("{:<8} {:<9} {:>5} {:>7} {:>8}  {}\n", "interval", "status", "price", "matched",
                             "residual", "digest");
    for (const auto& r : report.intervals) {
        std::cout << fmt::format("{:<8} {:<9} {:>5} {:>7} {:>8}  {}\n", r.interval,
                                 r.status == tes::IntervalStatus::Committed ? "committed" : "failed",
                                 r.result.clearing_price, r.result.matched_quantity(), r.result.dso_residual,
                                 r.digest.hex().substr(0, 16));
        if (!r.failure.empty()) std::cout << "         " << r.failure << "\n";
    }
    int committed = 0;
    for (const auto& r : report.intervals) committed += r.status == tes::IntervalStatus::Committed;
    std::cout << fmt::format("{} of {} intervals committed, {} recoveries, {:.1f} s; digest chain {}\n", committed,
                             report.intervals.size(), report.recoveries, report.seconds, report.digest_chain().hex());
    write_output(report_path, canonical(report.to_json()));
    write_output(a.csv, timings_csv(timings));
    return report.all_committed() ? kExitOk : kExitExecution;
}

std::vector<node::Block> load_chain(const manager::Manager& mgr, const dsl::NodeSpec& spec) {
    auto admin_ep = mgr.admin_endpoint(spec);
    if (port_open(admin_ep)) {
        node::AdminClient admin(admin_ep);
        std::vector<node::Block> out;
        auto height = admin.block_number();
        for (std::int64_t h = 1; h <= height; ++h) out.push_back(admin.get_block(h));
        return out;
    }
    auto dir = mgr.layout().node_dir(spec.name);
    if (!fs::exists(dir)) throw Error(Errc::NotCreated, spec.name + " has no data directory at " + dir.string());
    return node::DataDir(dir).load_blocks();
}

int cmd_audit(const Args& a, const dsl::NetworkConfig& config) {
    auto report = tes::DayReport::from_json(parse_json(read_file(a.report)));
    if (report.configuration_name != config.configuration_name)
        throw Error(Errc::InvalidConfig, "report is for \"" + report.configuration_name + "\", configuration is \"" +
                                             config.configuration_name + "\"");
    manager::Manager mgr(config, manager_options(a));
    const auto& spec = a.node.empty() ? config.miners.front() : dsl::node_lookup(config, a.node);
    auto chain = load_chain(mgr, spec);
    auto results = tes::audit(report, chain);

    int passed = 0;
    Json rows = Json::array();
    for (const auto& r : results) {
        passed += r.passed;
        std::cout << fmt::format("interval {:>2}  {}{}\n", r.interval, r.passed ? "PASS" : "FAIL",
                                 r.passed ? "" : "  " + r.reason);
        rows.push_back({{"interval", r.interval}, {"passed", r.passed}, {"reason", r.reason}});
    }
    std::cout << fmt::format("{} of {} intervals pass against {} ({} blocks)\n", passed, results.size(), spec.name,
                             chain.size());
    write_output(a.json, canonical({{"node", spec.name}, {"blocks", chain.size()}, {"intervals", rows}}));
    return passed == static_cast<int>(results.size()) ? kExitOk : kExitValidation;
}

int dispatch(const Args& a) {
    auto config = dsl::load_config(a.config);
    if (a.command == "validate") return cmd_validate(a, config);
    if (a.command == "bench") return cmd_bench(a, config);
    if (a.command == "run-tes") return cmd_run_tes(a, config);
    if (a.command == "audit") return cmd_audit(a, config);
    return cmd_lifecycle(a, config);
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    spdlog::set_default_logger(spdlog::stderr_logger_mt("netmgr"));
    spdlog::set_pattern("%H:%M:%S.%e %l %v");

    Args a;
    CLI::App app{"Test network manager"};
    app.require_subcommand(1, 1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "Check a configuration"},
        {"clients-create", "Create client node directories"},
        {"miners-create", "Create miner node directories"},
        {"blockchain-make", "Generate the genesis file"},
        {"blockchain-create", "Initialize every node's chain store"},
        {"distribute-clients", "Copy the genesis file to clients"},
        {"distribute-miners", "Copy the genesis file to miners"},
        {"create", "All creation phases"},
        {"start-miners", "Start miner nodes"},
        {"start-clients", "Start client nodes"},
        {"connect", "Peer every client with the miners"},
        {"stop", "Stop every node"},
        {"delete", "Remove every node directory"},
        {"bench", "Time the full lifecycle over several network sizes"},
        {"run-tes", "Create, start and connect the network, then trade one day"},
        {"audit", "Check a day report against the chain"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", a.config, "Network configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--workspace", a.workspace, "Directory holding node directories")->capture_default_str();
        sub->add_option("--executor", a.executor, "How commands reach node hosts")
            ->check(CLI::IsMember({"local", "ssh"}))
            ->capture_default_str();
        sub->add_flag("--force", a.force, "Re-create over existing directories");
        sub->add_flag("--parallel", a.parallel, "Act on the nodes of a phase concurrently");
        sub->add_option("--node-binary", a.node_binary, "chainnode path on the node hosts");
        sub->add_option("--block-interval-ms", a.block_interval_ms, "Minimum block spacing for started nodes")
            ->check(CLI::Range(1, 60000))
            ->capture_default_str();
        sub->add_flag("-v,--verbose", a.verbose, "Debug logging");
        if (name != "audit" && name != "validate") sub->add_option("--csv", a.csv, "Write phase timings as CSV");
        if (name == "bench") {
            sub->add_option("--counts", a.counts, "Prosumer counts")->delimiter(',')->capture_default_str();
            sub->add_option("--reps", a.reps, "Repetitions per count")->capture_default_str();
            sub->add_option("--summary-csv", a.summary_csv, "Write mean and standard deviation per phase");
        }
        if (name == "run-tes") {
            sub->add_option("--seed", a.seed, "Order book seed")->required();
            sub->add_option("--fault", a.faults, "interval:node:mode (repeatable)");
            sub->add_option("--report,--json", a.report, "Day report path");
        } else if (name == "audit") {
            sub->add_option("--report", a.report, "Day report to check")->required()->check(CLI::ExistingFile);
            sub->add_option("--node", a.node, "Node whose chain is read (default: first miner)");
            sub->add_option("--json", a.json, "Write per-interval results as JSON");
        } else {
            sub->add_option("--json", a.json, "Write machine-readable results as JSON");
        }
        sub->callback([&a, name = name] { a.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        if (app.get_subcommands().empty()) std::cerr << app.help();
        return kExitUsage;
    }
    spdlog::set_level(a.verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        return dispatch(a);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "Internal: " << e.what() << "\n";
        return kExitExecution;
    }
}
