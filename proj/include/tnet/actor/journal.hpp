/*
 * journal.hpp
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tnet/node/types.hpp"

namespace tnet::actor {

enum class JournalStatus { Pending, Mined, Failed };

std::string_view journal_status_name(JournalStatus status);

struct JournalEntry {
    node::Transaction tx;
    std::int64_t submitted_at_ms = 0;  // unix epoch
    JournalStatus status = JournalStatus::Pending;
    int resubmits = 0;
    std::optional<std::int64_t> mined_height;
    std::string error;  // Failed only
};

/// Append-only record of the transactions a wrapper has submitted. Every
/// change is one canonical-JSON line, flushed before the caller proceeds;
/// loading replays the lines. A torn final line is ignored.
class TxJournal {
public:
    explicit TxJournal(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    /// Adds a pending entry. Returns false (and writes nothing) if the tx is
    /// already journaled.
    bool record_submit(const node::Transaction& tx);
    void mark_mined(const Digest& tx_id, std::int64_t height);
    void mark_resubmitted(const Digest& tx_id);
    void mark_failed(const Digest& tx_id, const std::string& error);

    std::optional<JournalEntry> find(const Digest& tx_id) const;
    /// Entries in submission order.
    std::vector<JournalEntry> entries() const;
    std::vector<JournalEntry> pending() const;

private:
    void append(const Json& line);
    void apply(const Json& line);

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::vector<Digest> order_;
    std::map<Digest, JournalEntry> entries_;
};

}  // namespace tnet::actor
