/*
 * error.hpp
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace tnet {

enum class Errc {
    // dsl
    SyntaxError,
    SchemaError,
    NotFound,
    InvalidConfig,
    // genesis / files
    IoError,
    HashMismatch,
    // node
    PortInUse,
    GenesisMismatch,
    InsufficientBalance,
    BadNonce,
    CostExceedsGasLimit,
    NodeUnresponsive,
    ConnectionRefused,
    Timeout,
    MalformedRequest,
    // manager
    AlreadyExists,
    ExecutorFailure,
    MissingGenesis,
    NotCreated,
    NotRunning,
    // actor
    BindFailure,
    RecoveryFailed,
    PeerUnreachable,
    Internal,
};

std::string_view errc_name(Errc code) noexcept;

/// Parses a name produced by errc_name(); unknown names map to Internal.
Errc errc_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          detail_(message) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace tnet
