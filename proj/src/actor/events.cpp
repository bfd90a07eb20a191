/*
 * events.cpp
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

#include "tnet/actor/events.hpp"

#include <spdlog/spdlog.h>

#include <vector>

namespace tnet::actor {

std::string_view event_name(EventKind kind) {
    switch (kind) {
        case EventKind::NewBlock: return "NewBlock";
        case EventKind::TransactionMined: return "TransactionMined";
        case EventKind::TransactionStalled: return "TransactionStalled";
        case EventKind::NodeUnresponsive: return "NodeUnresponsive";
        case EventKind::Recovered: return "Recovered";
        case EventKind::RecoveryFailed: return "RecoveryFailed";
    }
    return "?";
}

EventFilter kind_is(EventKind kind) {
    return [kind](const NodeEvent& e) { return e.kind == kind; };
}

Dispatcher::Dispatcher(std::string owner, std::chrono::milliseconds callback_deadline)
    : owner_(std::move(owner)), deadline_(callback_deadline), worker_([this] { run(); }) {}

Dispatcher::~Dispatcher() {
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    worker_.join();
}

SubscriptionId Dispatcher::subscribe(EventFilter filter, EventCallback callback) {
    std::lock_guard lock(mu_);
    auto id = next_id_++;
    subs_.emplace(id, std::make_pair(std::move(filter), std::move(callback)));
    return id;
}

void Dispatcher::unsubscribe(SubscriptionId id) {
    std::lock_guard lock(mu_);
    subs_.erase(id);
}

void Dispatcher::post(NodeEvent event) {
    {
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(event));
    }
    cv_.notify_all();
}

void Dispatcher::flush() {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

std::uint64_t Dispatcher::slow_callbacks() const {
    std::lock_guard lock(mu_);
    return slow_;
}

void Dispatcher::run() {
    std::unique_lock lock(mu_);
    while (true) {
        cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
        if (queue_.empty()) break;  // stopping and drained
        NodeEvent event = std::move(queue_.front());
        queue_.pop_front();
        busy_ = true;
        std::vector<SubscriptionId> ids;
        for (const auto& [id, _] : subs_) ids.push_back(id);
        for (auto id : ids) {
            auto it = subs_.find(id);
            if (it == subs_.end()) continue;  // removed by an earlier callback
            auto [filter, callback] = it->second;
            lock.unlock();
            bool match = false;
            auto t0 = std::chrono::steady_clock::now();
            try {
                match = filter(event);
                if (match) callback(event);
            } catch (const std::exception& e) {
                spdlog::error("[{}] {} callback threw: {}", owner_, event_name(event.kind), e.what());
            }
            auto took = std::chrono::steady_clock::now() - t0;
            lock.lock();
            if (match && took > deadline_) {
                ++slow_;
                spdlog::warn("[{}] {} callback took {} ms (deadline {} ms)", owner_, event_name(event.kind),
                             std::chrono::duration_cast<std::chrono::milliseconds>(took).count(), deadline_.count());
            }
        }
        busy_ = false;
        if (queue_.empty()) idle_cv_.notify_all();
    }
    busy_ = false;
    idle_cv_.notify_all();
}

}  // namespace tnet::actor
