/*
 * net.hpp
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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tnet {

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;

    /// Parses "host:port"; throws Error(SchemaError) on malformed input.
    static Endpoint parse(std::string_view text);
    std::string str() const { return host + ":" + std::to_string(port); }

    bool operator==(const Endpoint&) const = default;
};

using Millis = std::chrono::milliseconds;

/// Owning TCP socket. All descriptors are created close-on-exec so spawned
/// node processes never inherit them.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    ~Socket() { close(); }
    Socket(Socket&& other) noexcept : fd_(other.release()) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    int release() {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }
    void close();
    /// Wakes any thread blocked in accept/recv on this socket.
    void shutdown();

    /// Throws Error(PortInUse) when the port is taken.
    static Socket listen(std::uint16_t port, int backlog = 128);
    /// Throws Error(ConnectionRefused) or Error(Timeout).
    static Socket connect(const Endpoint& ep, Millis timeout);

    /// Returns an invalid socket once the listener has been shut down.
    Socket accept();
    std::uint16_t local_port() const;

    void send_all(std::string_view data);
    /// Reads until '\n' (stripped). Returns nullopt on orderly EOF. Throws
    /// Error(Timeout) if `timeout` elapses first.
    std::optional<std::string> read_line(std::optional<Millis> timeout = std::nullopt);
    /// Length-prefixed frame: 4-byte big-endian length then body.
    void send_frame(std::string_view body);
    std::optional<std::string> read_frame(std::optional<Millis> timeout = std::nullopt);

private:
    /// Reads exactly n bytes into out; false on EOF before any byte.
    bool read_exact(char* out, std::size_t n, std::optional<Millis> timeout);
    void wait_readable(std::optional<Millis> timeout);

    int fd_ = -1;
    std::string buffer_;
};

/// True if something accepts TCP connections at ep right now.
bool port_open(const Endpoint& ep, Millis timeout = Millis(200));

/// Asks the kernel for a currently unused TCP port.
std::uint16_t free_port();

}  // namespace tnet
