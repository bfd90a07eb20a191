/*
 * control.cpp
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

#include "tnet/node/control.hpp"

#include <signal.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "tnet/error.hpp"
#include "tnet/node/admin_client.hpp"
#include "tnet/process.hpp"

namespace tnet::node {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

fs::path default_node_binary() {
    if (const char* env = std::getenv("TNET_CHAINNODE"); env && *env) return env;
    std::error_code ec;
    auto self = fs::read_symlink("/proc/self/exe", ec);
    if (ec) return "chainnode";
    return self.parent_path() / "chainnode";
}

std::string start_command(const fs::path& binary, const fs::path& data_dir) {
    return shell_quote(binary.string()) + " --datadir " + shell_quote(data_dir.string()) + " --daemonize";
}

void launch_local(const fs::path& binary, const fs::path& data_dir) {
    auto r = run_process({binary.string(), "--datadir", data_dir.string(), "--daemonize"}, std::chrono::seconds(30));
    if (r.exit_status == 0) return;
    // The daemon prints "<ErrcName>: message" on failure.
    auto colon = r.output.find(':');
    Errc code = colon == std::string::npos ? Errc::ExecutorFailure : errc_from_name(r.output.substr(0, colon));
    if (code == Errc::Internal) code = Errc::ExecutorFailure;
    throw Error(code, "starting node in " + data_dir.string() + " failed: " + r.output);
}

bool kill_from_pidfile(const fs::path& data_dir) {
    std::ifstream in(data_dir / "node.pid");
    long pid = 0;
    if (!(in >> pid) || pid <= 1) return false;
    return ::kill(static_cast<pid_t>(pid), SIGKILL) == 0;
}

bool wait_port_closed(const Endpoint& ep, std::chrono::milliseconds deadline) {
    auto until = Clock::now() + deadline;
    for (;;) {
        if (!port_open(ep, Millis(100))) return true;
        if (Clock::now() >= until) return false;
        std::this_thread::sleep_for(Millis(5));
    }
}

bool wait_port_open(const Endpoint& ep, std::chrono::milliseconds deadline) {
    auto until = Clock::now() + deadline;
    for (;;) {
        if (port_open(ep, Millis(100))) return true;
        if (Clock::now() >= until) return false;
        std::this_thread::sleep_for(Millis(5));
    }
}

StopOutcome stop_node(const Endpoint& admin, const fs::path& data_dir, std::chrono::milliseconds grace) {
    StopOutcome out;
    auto start = Clock::now();
    if (!port_open(admin)) return out;
    out.was_running = true;
    auto until = start + grace;
    try {
        AdminClient(admin, std::chrono::duration_cast<Millis>(grace)).stop();
    } catch (const Error&) {
        // Timeout or refused; fall through to the deadline check.
    }
    auto left = std::chrono::duration_cast<Millis>(until - Clock::now());
    if (left.count() > 0 && wait_port_closed(admin, left)) {
        out.graceful = true;
    } else {
        kill_from_pidfile(data_dir);
        wait_port_closed(admin, Millis(5000));
    }
    out.latency = Clock::now() - start;
    return out;
}

}  // namespace tnet::node
