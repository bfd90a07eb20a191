/*
 * executor.cpp
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

#include "tnet/manager/executor.hpp"

#include "tnet/error.hpp"
#include "tnet/process.hpp"

namespace fs = std::filesystem;

namespace tnet::manager {

namespace {

constexpr std::chrono::seconds kCommandTimeout{120};

}  // namespace

std::string Executor::run_checked(const std::string& host, const std::string& command) {
    auto r = run(host, command);
    if (r.exit_status != 0)
        throw Error(Errc::ExecutorFailure, host + ": `" + command + "` exited " + std::to_string(r.exit_status) +
                                               (r.output.empty() ? "" : ": " + r.output));
    return r.output;
}

ExecResult LocalExecutor::run(const std::string& host, const std::string& command) {
    auto r = run_shell(command, kCommandTimeout);
    if (r.timed_out) throw Error(Errc::ExecutorFailure, host + ": `" + command + "` timed out");
    return {r.exit_status, r.output};
}

void LocalExecutor::put_file(const std::string& host, const fs::path& local, const fs::path& remote) {
    std::error_code ec;
    fs::create_directories(remote.parent_path(), ec);
    if (!ec) fs::copy_file(local, remote, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error(Errc::ExecutorFailure, host + ": copy " + local.string() + " -> " + remote.string() + ": " + ec.message());
}

SshExecutor::SshExecutor(std::vector<std::string> extra_options, std::chrono::seconds connect_timeout)
    : extra_(std::move(extra_options)), connect_timeout_(connect_timeout) {}

std::vector<std::string> SshExecutor::base_options() const {
    std::vector<std::string> opts = {"-o", "BatchMode=yes", "-o",
                                     "ConnectTimeout=" + std::to_string(connect_timeout_.count())};
    opts.insert(opts.end(), extra_.begin(), extra_.end());
    return opts;
}

ExecResult SshExecutor::run(const std::string& host, const std::string& command) {
    std::vector<std::string> argv = {"ssh"};
    auto opts = base_options();
    argv.insert(argv.end(), opts.begin(), opts.end());
    argv.push_back(host);
    argv.push_back(command);
    auto r = run_process(argv, kCommandTimeout);
    // ssh reserves 255 for its own failures.
    if (r.timed_out || r.exit_status == 255 || r.exit_status < 0)
        throw Error(Errc::ExecutorFailure, host + ": ssh failed: " + r.output);
    return {r.exit_status, r.output};
}

void SshExecutor::put_file(const std::string& host, const fs::path& local, const fs::path& remote) {
    run_checked(host, "mkdir -p " + shell_quote(remote.parent_path().string()));
    std::vector<std::string> argv = {"scp", "-q"};
    auto opts = base_options();
    argv.insert(argv.end(), opts.begin(), opts.end());
    argv.push_back(local.string());
    argv.push_back(host + ":" + remote.string());
    auto r = run_process(argv, kCommandTimeout);
    if (r.exit_status != 0) throw Error(Errc::ExecutorFailure, host + ": scp failed: " + r.output);
}

std::shared_ptr<Executor> make_executor(std::string_view kind) {
    if (kind == "local") return std::make_shared<LocalExecutor>();
    if (kind == "ssh") return std::make_shared<SshExecutor>();
    throw Error(Errc::InvalidConfig, "unknown executor \"" + std::string(kind) + "\" (expected local or ssh)");
}

}  // namespace tnet::manager
