/*
 * control.hpp
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
#include <optional>
#include <string>
#include <vector>

#include "tnet/net.hpp"

namespace tnet::node {

/// Path of the node daemon: $TNET_CHAINNODE if set, else a `chainnode`
/// next to the running executable.
std::filesystem::path default_node_binary();

/// Shell command that starts a node from its data directory and returns once
/// the node is listening (the daemon signals readiness before detaching).
std::string start_command(const std::filesystem::path& binary, const std::filesystem::path& data_dir);

/// Starts a node on this host; throws Error with the daemon's message on
/// failure (PortInUse, GenesisMismatch, ...).
void launch_local(const std::filesystem::path& binary, const std::filesystem::path& data_dir);

/// SIGKILLs the pid recorded in data_dir/node.pid. False if there is none.
bool kill_from_pidfile(const std::filesystem::path& data_dir);

bool wait_port_closed(const Endpoint& ep, std::chrono::milliseconds deadline);
bool wait_port_open(const Endpoint& ep, std::chrono::milliseconds deadline);

struct StopOutcome {
    bool was_running = false;
    bool graceful = false;
    std::chrono::duration<double> latency{0};
};

/// Admin stop, then SIGKILL via the pid file if the admin port is still open
/// after `grace`.
StopOutcome stop_node(const Endpoint& admin, const std::filesystem::path& data_dir,
                      std::chrono::milliseconds grace = std::chrono::milliseconds(5000));

}  // namespace tnet::node
