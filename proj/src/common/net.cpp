/*
 * net.cpp
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

#include "tnet/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tnet/error.hpp"

namespace tnet {

namespace {

constexpr std::size_t kMaxFrame = 64u << 20;

std::string errno_text() { return std::strerror(errno); }

int poll_ms(std::optional<Millis> timeout) {
    return timeout ? static_cast<int>(timeout->count()) : -1;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
        throw Error(Errc::SchemaError, "endpoint must be host:port, got '" + std::string(text) + "'");
    unsigned long port = 0;
    for (char c : text.substr(colon + 1)) {
        if (c < '0' || c > '9') throw Error(Errc::SchemaError, "bad port in '" + std::string(text) + "'");
        port = port * 10 + static_cast<unsigned long>(c - '0');
        if (port > 65535) throw Error(Errc::SchemaError, "port out of range in '" + std::string(text) + "'");
    }
    return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.release();
        buffer_ = std::move(other.buffer_);
    }
    return *this;
}

void Socket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket Socket::listen(std::uint16_t port, int backlog) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(Errc::IoError, "socket: " + errno_text());
    Socket sock(fd);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        if (errno == EADDRINUSE) throw Error(Errc::PortInUse, "port " + std::to_string(port) + " is in use");
        throw Error(Errc::IoError, "bind " + std::to_string(port) + ": " + errno_text());
    }
    if (::listen(fd, backlog) != 0) throw Error(Errc::IoError, "listen: " + errno_text());
    return sock;
}

Socket Socket::connect(const Endpoint& ep, Millis timeout) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    auto port = std::to_string(ep.port);
    if (::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
        throw Error(Errc::ConnectionRefused, "cannot resolve " + ep.host);
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof(addr));
    ::freeaddrinfo(res);

    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0);
    if (fd < 0) throw Error(Errc::IoError, "socket: " + errno_text());
    Socket sock(fd);
    int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    if (rc != 0 && errno != EINPROGRESS)
        throw Error(Errc::ConnectionRefused, ep.str() + ": " + errno_text());
    if (rc != 0) {
        pollfd pfd{fd, POLLOUT, 0};
        int n = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
        if (n == 0) throw Error(Errc::Timeout, "connect to " + ep.str() + " timed out");
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        if (n < 0 || err != 0)
            throw Error(Errc::ConnectionRefused, ep.str() + ": " + std::strerror(err ? err : errno));
    }
    int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return sock;
}

Socket Socket::accept() {
    for (;;) {
        int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return Socket(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return Socket();
    }
}

std::uint16_t Socket::local_port() const {
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

void Socket::send_all(std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::ConnectionRefused, "send: " + errno_text());
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

void Socket::wait_readable(std::optional<Millis> timeout) {
    pollfd pfd{fd_, POLLIN, 0};
    for (;;) {
        int n = ::poll(&pfd, 1, poll_ms(timeout));
        if (n > 0) return;
        if (n == 0) throw Error(Errc::Timeout, "read timed out");
        if (errno != EINTR) throw Error(Errc::IoError, "poll: " + errno_text());
    }
}

std::optional<std::string> Socket::read_line(std::optional<Millis> timeout) {
    auto deadline = timeout ? std::optional(std::chrono::steady_clock::now() + *timeout) : std::nullopt;
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        std::optional<Millis> left;
        if (deadline) {
            left = std::chrono::duration_cast<Millis>(*deadline - std::chrono::steady_clock::now());
            if (left->count() < 0) left = Millis(0);
        }
        wait_readable(left);
        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n == 0) return std::nullopt;
        if (n < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

bool Socket::read_exact(char* out, std::size_t n, std::optional<Millis> timeout) {
    std::size_t got = 0;
    while (got < n) {
        if (!buffer_.empty()) {
            std::size_t take = std::min(n - got, buffer_.size());
            std::memcpy(out + got, buffer_.data(), take);
            buffer_.erase(0, take);
            got += take;
            continue;
        }
        wait_readable(timeout);
        ssize_t r = ::recv(fd_, out + got, n - got, 0);
        if (r == 0) {
            if (got == 0) return false;
            throw Error(Errc::IoError, "connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            if (got == 0) return false;
            throw Error(Errc::IoError, "recv: " + errno_text());
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

void Socket::send_frame(std::string_view body) {
    std::uint32_t len = htonl(static_cast<std::uint32_t>(body.size()));
    std::string out(reinterpret_cast<const char*>(&len), sizeof(len));
    out.append(body);
    send_all(out);
}

std::optional<std::string> Socket::read_frame(std::optional<Millis> timeout) {
    std::uint32_t len_be = 0;
    if (!read_exact(reinterpret_cast<char*>(&len_be), sizeof(len_be), timeout)) return std::nullopt;
    std::uint32_t len = ntohl(len_be);
    if (len > kMaxFrame) throw Error(Errc::MalformedRequest, "frame too large");
    std::string body(len, '\0');
    if (len > 0 && !read_exact(body.data(), len, timeout))
        throw Error(Errc::IoError, "connection closed mid-frame");
    return body;
}

bool port_open(const Endpoint& ep, Millis timeout) {
    try {
        Socket::connect(ep, timeout);
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::uint16_t free_port() {
    auto sock = Socket::listen(0);
    return sock.local_port();
}

}  // namespace tnet
