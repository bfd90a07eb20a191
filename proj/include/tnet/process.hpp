/*
 * process.hpp
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
#include <optional>
#include <string>
#include <vector>

namespace tnet {

struct ProcessResult {
    int exit_status = -1;  // -1 when killed by a signal or on timeout
    std::string output;    // stdout and stderr interleaved
    bool timed_out = false;
};

/// Runs argv[0] with the given arguments, capturing combined output. The
/// child gets only stdin=/dev/null and the capture pipe; every other
/// descriptor is closed before exec.
ProcessResult run_process(const std::vector<std::string>& argv,
                          std::optional<std::chrono::milliseconds> timeout = std::nullopt);

/// Convenience for `/bin/sh -c command`.
ProcessResult run_shell(const std::string& command,
                        std::optional<std::chrono::milliseconds> timeout = std::nullopt);

/// Single-quotes `arg` for inclusion in a POSIX shell command line.
std::string shell_quote(const std::string& arg);

}  // namespace tnet
