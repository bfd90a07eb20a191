/*
 * error.cpp
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

#include "tnet/error.hpp"

#include <array>
#include <utility>

namespace tnet {

namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 24> kNames{{
    {Errc::SyntaxError, "SyntaxError"},
    {Errc::SchemaError, "SchemaError"},
    {Errc::NotFound, "NotFound"},
    {Errc::InvalidConfig, "InvalidConfig"},
    {Errc::IoError, "IoError"},
    {Errc::HashMismatch, "HashMismatch"},
    {Errc::PortInUse, "PortInUse"},
    {Errc::GenesisMismatch, "GenesisMismatch"},
    {Errc::InsufficientBalance, "InsufficientBalance"},
    {Errc::BadNonce, "BadNonce"},
    {Errc::CostExceedsGasLimit, "CostExceedsGasLimit"},
    {Errc::NodeUnresponsive, "NodeUnresponsive"},
    {Errc::ConnectionRefused, "ConnectionRefused"},
    {Errc::Timeout, "Timeout"},
    {Errc::MalformedRequest, "MalformedRequest"},
    {Errc::AlreadyExists, "AlreadyExists"},
    {Errc::ExecutorFailure, "ExecutorFailure"},
    {Errc::MissingGenesis, "MissingGenesis"},
    {Errc::NotCreated, "NotCreated"},
    {Errc::NotRunning, "NotRunning"},
    {Errc::BindFailure, "BindFailure"},
    {Errc::RecoveryFailed, "RecoveryFailed"},
    {Errc::PeerUnreachable, "PeerUnreachable"},
    {Errc::Internal, "Internal"},
}};

}  // namespace

std::string_view errc_name(Errc code) noexcept {
    for (const auto& [c, name] : kNames)
        if (c == code) return name;
    return "Internal";
}

Errc errc_from_name(std::string_view name) noexcept {
    for (const auto& [c, n] : kNames)
        if (n == name) return c;
    return Errc::Internal;
}

}  // namespace tnet
