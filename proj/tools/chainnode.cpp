/*
 * chainnode.cpp
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

// chainnode: runs one simulated chain node from a data directory.

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

#include "tnet/error.hpp"
#include "tnet/genesis/genesis.hpp"
#include "tnet/node/chain_node.hpp"

namespace {

void report_and_exit(int fd, int status, const std::string& message) {
    if (fd >= 0) {
        std::string out = message;
        [[maybe_unused]] auto n = ::write(fd, out.data(), out.size());
        ::close(fd);
    } else if (!message.empty()) {
        std::cerr << message << "\n";
    }
    std::_Exit(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated chain node"};
    std::string datadir;
    std::string genesis_path;
    bool daemonize = false;
    bool init_only = false;
    std::optional<int> block_interval_ms;
    std::string make_genesis_config;
    std::string out_path;
    auto* datadir_opt = app.add_option("--datadir", datadir, "Node data directory (holds node.json)");
    auto* make_opt = app.add_option("--make-genesis", make_genesis_config,
                                    "Write the genesis for this network configuration to --out and exit");
    app.add_option("--out", out_path, "Output file for --make-genesis")->needs(make_opt);
    make_opt->excludes(datadir_opt);
    app.add_option("--genesis", genesis_path, "Genesis file to verify against / initialize from");
    app.add_option("--block-interval-ms", block_interval_ms, "Override the minimum block spacing");
    app.add_flag("--daemonize", daemonize, "Detach once listening");
    app.add_flag("--init", init_only, "Initialize the chain store from the genesis and exit");
    CLI11_PARSE(app, argc, argv);

    if (!make_genesis_config.empty()) {
        try {
            if (out_path.empty()) throw tnet::Error(tnet::Errc::InvalidConfig, "--out is required");
            auto doc = tnet::genesis::make_genesis(tnet::dsl::load_config(make_genesis_config));
            tnet::genesis::write_genesis(doc, out_path);
            std::cout << doc.genesis_hash.hex() << "\n";
            return 0;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }
    if (datadir.empty()) {
        std::cerr << "--datadir is required\n";
        return 64;
    }

    if (init_only) {
        try {
            tnet::node::DataDir dir(datadir);
            std::optional<tnet::genesis::GenesisDocument> supplied;
            if (!genesis_path.empty()) supplied = tnet::genesis::read_genesis(genesis_path);
            auto doc = dir.open(supplied);
            std::ofstream(dir.blocks_path(), std::ios::app);
            std::cout << doc.genesis_hash.hex() << "\n";
            return 0;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }

    int ready_fd = -1;
    if (daemonize) {
        int pipefd[2];
        if (::pipe(pipefd) != 0) return 2;
        pid_t pid = ::fork();
        if (pid < 0) return 2;
        if (pid > 0) {
            ::close(pipefd[1]);
            std::string message;
            char buf[512];
            ssize_t n;
            while ((n = ::read(pipefd[0], buf, sizeof(buf))) > 0) message.append(buf, static_cast<size_t>(n));
            if (message == "ready") return 0;
            std::cerr << (message.empty() ? "Internal: node exited during startup" : message) << "\n";
            return 2;
        }
        ::close(pipefd[0]);
        ready_fd = pipefd[1];
        ::setsid();
        int devnull = ::open("/dev/null", O_RDWR);
        ::dup2(devnull, 0);
        std::string log = datadir + "/node.log";
        int logfd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (logfd >= 0) {
            ::dup2(logfd, 1);
            ::dup2(logfd, 2);
            ::close(logfd);
        }
        ::close(devnull);
    }

    spdlog::set_default_logger(spdlog::stderr_logger_mt("chainnode"));
    spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");

    // Termination signals are consumed by a sigwait thread, never by a handler.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGTERM);
    sigaddset(&stop_signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
    std::signal(SIGPIPE, SIG_IGN);

    std::unique_ptr<tnet::node::ChainNode> node;
    try {
        tnet::node::DataDir dir(datadir);
        auto manifest = dir.load_manifest();
        auto options = tnet::node::NodeOptions::from_manifest(manifest, datadir);
        if (!genesis_path.empty()) options.genesis = tnet::genesis::read_genesis(genesis_path);
        if (block_interval_ms) options.block_interval = std::chrono::milliseconds(*block_interval_ms);
        node = std::make_unique<tnet::node::ChainNode>(options);
        node->start();
        std::ofstream(dir.pid_path()) << ::getpid() << "\n";
    } catch (const tnet::Error& e) {
        report_and_exit(ready_fd, 2, e.what());
    } catch (const std::exception& e) {
        report_and_exit(ready_fd, 2, std::string("Internal: ") + e.what());
    }

    std::thread([&node, stop_signals] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        node->request_stop();
    }).detach();
    if (ready_fd >= 0) {
        [[maybe_unused]] auto n = ::write(ready_fd, "ready", 5);
        ::close(ready_fd);
    }

    node->wait();
    node->stop();
    std::error_code ec;
    std::filesystem::remove(tnet::node::DataDir(datadir).pid_path(), ec);
    return 0;
}
