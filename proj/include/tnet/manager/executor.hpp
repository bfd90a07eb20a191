/*
 * executor.hpp
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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace tnet::manager {

struct ExecResult {
    int exit_status = -1;
    std::string output;
};

/// Where the manager's side effects happen. run() and put_file() are the
/// only ways the manager touches a node host. Implementations must allow
/// concurrent calls for distinct hosts.
class Executor {
public:
    virtual ~Executor() = default;

    virtual std::string_view kind() const = 0;
    /// Runs a shell command on `host`. Throws Error(ExecutorFailure) naming
    /// the host if the command could not be run at all; a nonzero exit of
    /// the command itself is returned, not thrown.
    virtual ExecResult run(const std::string& host, const std::string& command) = 0;
    /// Copies a local file to `remote` on `host`, creating parent
    /// directories. Throws Error(ExecutorFailure).
    virtual void put_file(const std::string& host, const std::filesystem::path& local,
                          const std::filesystem::path& remote) = 0;
    /// Address the manager uses to reach services on `host`.
    virtual std::string address(const std::string& host) const = 0;

    /// run(), throwing Error(ExecutorFailure) on a nonzero exit.
    std::string run_checked(const std::string& host, const std::string& command);
};

/// Runs everything on this machine whatever the host field says.
class LocalExecutor : public Executor {
public:
    std::string_view kind() const override { return "local"; }
    ExecResult run(const std::string& host, const std::string& command) override;
    void put_file(const std::string& host, const std::filesystem::path& local,
                  const std::filesystem::path& remote) override;
    std::string address(const std::string&) const override { return "127.0.0.1"; }
};

/// ssh/scp to each host in batch mode (key-based auth must already work).
class SshExecutor : public Executor {
public:
    explicit SshExecutor(std::vector<std::string> extra_options = {},
                         std::chrono::seconds connect_timeout = std::chrono::seconds(5));
    std::string_view kind() const override { return "ssh"; }
    ExecResult run(const std::string& host, const std::string& command) override;
    void put_file(const std::string& host, const std::filesystem::path& local,
                  const std::filesystem::path& remote) override;
    std::string address(const std::string& host) const override { return host; }

private:
    std::vector<std::string> base_options() const;

    std::vector<std::string> extra_;
    std::chrono::seconds connect_timeout_;
};

/// "local" or "ssh"; throws Error(InvalidConfig) otherwise.
std::shared_ptr<Executor> make_executor(std::string_view kind);

}  // namespace tnet::manager
