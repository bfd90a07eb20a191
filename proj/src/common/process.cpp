/*
 * process.cpp
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

#include "tnet/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tnet/error.hpp"

namespace tnet {

namespace {

void close_from(int lowfd) {
#ifdef SYS_close_range
    if (::syscall(SYS_close_range, lowfd, ~0U, 0) == 0) return;
#endif
    long max = ::sysconf(_SC_OPEN_MAX);
    for (int fd = lowfd; fd < max; ++fd) ::close(fd);
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv,
                          std::optional<std::chrono::milliseconds> timeout) {
    if (argv.empty()) throw Error(Errc::Internal, "run_process: empty argv");
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    int pipefd[2];
    if (::pipe2(pipefd, O_CLOEXEC) != 0) throw Error(Errc::IoError, "pipe: " + std::string(std::strerror(errno)));

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        throw Error(Errc::IoError, "fork: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        // Async-signal-safe calls only from here on.
        int devnull = ::open("/dev/null", O_RDONLY);
        ::dup2(devnull, 0);
        ::dup2(pipefd[1], 1);
        ::dup2(pipefd[1], 2);
        close_from(3);
        ::execvp(cargv[0], cargv.data());
        ::_exit(127);
    }
    ::close(pipefd[1]);

    ProcessResult result;
    auto deadline = timeout ? std::optional(std::chrono::steady_clock::now() + *timeout) : std::nullopt;
    char buf[4096];
    for (;;) {
        int wait_ms = -1;
        if (deadline) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline -
                                                                              std::chrono::steady_clock::now());
            wait_ms = static_cast<int>(std::max<long long>(0, left.count()));
        }
        pollfd pfd{pipefd[0], POLLIN, 0};
        int n = ::poll(&pfd, 1, wait_ms);
        if (n == 0) {
            ::kill(pid, SIGKILL);
            result.timed_out = true;
            break;
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        ssize_t r = ::read(pipefd[0], buf, sizeof(buf));
        if (r > 0) {
            result.output.append(buf, static_cast<std::size_t>(r));
            continue;
        }
        if (r < 0 && errno == EINTR) continue;
        break;
    }
    ::close(pipefd[0]);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!result.timed_out && WIFEXITED(status)) result.exit_status = WEXITSTATUS(status);
    return result;
}

ProcessResult run_shell(const std::string& command, std::optional<std::chrono::milliseconds> timeout) {
    return run_process({"/bin/sh", "-c", command}, timeout);
}

std::string shell_quote(const std::string& arg) {
    std::string out = "'";
    for (char c : arg) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

}  // namespace tnet
