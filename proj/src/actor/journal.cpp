/*
 * journal.cpp
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

#include "tnet/actor/journal.hpp"

#include <chrono>
#include <fstream>

#include "tnet/error.hpp"

namespace tnet::actor {

std::string_view journal_status_name(JournalStatus status) {
    switch (status) {
        case JournalStatus::Pending: return "pending";
        case JournalStatus::Mined: return "mined";
        case JournalStatus::Failed: return "failed";
    }
    return "?";
}

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

TxJournal::TxJournal(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) break;  // torn tail
        apply(j);
    }
}

void TxJournal::append(const Json& line) {
    std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    out << canonical(line) << '\n';
    out.flush();
    if (!out) throw Error(Errc::IoError, "cannot append to " + path_.string());
}

void TxJournal::apply(const Json& line) {
    auto op = line.value("op", "");
    if (op == "submit") {
        auto tx = node::Transaction::from_json(line.at("tx"));
        if (entries_.contains(tx.tx_id)) return;
        JournalEntry e;
        e.tx = tx;
        e.submitted_at_ms = line.value("at", std::int64_t{0});
        order_.push_back(tx.tx_id);
        entries_.emplace(tx.tx_id, std::move(e));
        return;
    }
    auto it = entries_.find(Digest::from_hex(line.at("txId").get<std::string>()));
    if (it == entries_.end()) return;
    auto& e = it->second;
    if (op == "mined") {
        e.status = JournalStatus::Mined;
        e.mined_height = line.at("height").get<std::int64_t>();
    } else if (op == "resubmit") {
        ++e.resubmits;
    } else if (op == "failed") {
        e.status = JournalStatus::Failed;
        e.error = line.value("error", "");
    }
}

bool TxJournal::record_submit(const node::Transaction& tx) {
    std::lock_guard lock(mu_);
    if (entries_.contains(tx.tx_id)) return false;
    Json line = {{"op", "submit"}, {"tx", tx.to_json()}, {"at", now_ms()}};
    append(line);
    apply(line);
    return true;
}

void TxJournal::mark_mined(const Digest& tx_id, std::int64_t height) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(tx_id);
    if (it == entries_.end() || it->second.status == JournalStatus::Mined) return;
    Json line = {{"op", "mined"}, {"txId", tx_id.hex()}, {"height", height}};
    append(line);
    apply(line);
}

void TxJournal::mark_resubmitted(const Digest& tx_id) {
    std::lock_guard lock(mu_);
    if (!entries_.contains(tx_id)) return;
    Json line = {{"op", "resubmit"}, {"txId", tx_id.hex()}};
    append(line);
    apply(line);
}

void TxJournal::mark_failed(const Digest& tx_id, const std::string& error) {
    std::lock_guard lock(mu_);
    if (!entries_.contains(tx_id)) return;
    Json line = {{"op", "failed"}, {"txId", tx_id.hex()}, {"error", error}};
    append(line);
    apply(line);
}

std::optional<JournalEntry> TxJournal::find(const Digest& tx_id) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(tx_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<JournalEntry> TxJournal::entries() const {
    std::lock_guard lock(mu_);
    std::vector<JournalEntry> out;
    for (const auto& id : order_) out.push_back(entries_.at(id));
    return out;
}

std::vector<JournalEntry> TxJournal::pending() const {
    std::lock_guard lock(mu_);
    std::vector<JournalEntry> out;
    for (const auto& id : order_)
        if (entries_.at(id).status == JournalStatus::Pending) out.push_back(entries_.at(id));
    return out;
}

}  // namespace tnet::actor
