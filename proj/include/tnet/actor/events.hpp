/*
 * events.hpp
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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "tnet/digest.hpp"

namespace tnet::actor {

enum class EventKind {
    NewBlock,
    TransactionMined,
    TransactionStalled,
    NodeUnresponsive,
    Recovered,
    RecoveryFailed,
};

std::string_view event_name(EventKind kind);

struct NodeEvent {
    EventKind kind = EventKind::NewBlock;
    std::int64_t height = 0;           // NewBlock, TransactionMined
    Digest tx_id;                      // TransactionMined, TransactionStalled
    std::int64_t blocks_waited = 0;    // TransactionStalled
    int consecutive_timeouts = 0;      // NodeUnresponsive
    std::string detail;                // Recovered, RecoveryFailed
    std::chrono::system_clock::time_point observed_at;
};

using EventFilter = std::function<bool(const NodeEvent&)>;
using EventCallback = std::function<void(const NodeEvent&)>;
using SubscriptionId = std::uint64_t;

/// Filter matching a single event kind.
EventFilter kind_is(EventKind kind);

/// Serialized event delivery. Events are queued in order and handed to
/// matching subscribers on one thread, so callbacks never race each other.
/// Subscriptions stay active until unsubscribed. Callbacks should return
/// quickly; one that runs past the deadline is logged.
class Dispatcher {
public:
    explicit Dispatcher(std::string owner, std::chrono::milliseconds callback_deadline = std::chrono::milliseconds(100));
    ~Dispatcher();
    Dispatcher(const Dispatcher&) = delete;
    Dispatcher& operator=(const Dispatcher&) = delete;

    SubscriptionId subscribe(EventFilter filter, EventCallback callback);
    /// After this returns the callback is not invoked again, unless it is
    /// running right now on the dispatcher thread.
    void unsubscribe(SubscriptionId id);

    void post(NodeEvent event);
    /// Blocks until every event posted so far has been delivered.
    void flush();

    std::uint64_t slow_callbacks() const;

private:
    void run();

    std::string owner_;
    std::chrono::milliseconds deadline_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<NodeEvent> queue_;
    std::map<SubscriptionId, std::pair<EventFilter, EventCallback>> subs_;
    SubscriptionId next_id_ = 1;
    bool busy_ = false;
    bool stop_ = false;
    std::uint64_t slow_ = 0;
    std::thread worker_;
};

}  // namespace tnet::actor
