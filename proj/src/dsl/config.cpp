/*
 * config.cpp
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

#include "tnet/dsl/config.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "tnet/error.hpp"
#include "tnet/json.hpp"

namespace tnet::dsl {

namespace {

const std::set<std::string> kTopKeys = {"configurationName", "configurationVersion", "chainID", "difficulty",
                                        "gasLimit",          "balance",              "clients", "miners"};
const std::set<std::string> kClientKeys = {"name", "role", "host", "blockchainPort", "adminPort", "wrapperPort"};
const std::set<std::string> kMinerKeys = {"name", "host", "blockchainPort", "adminPort"};

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw Error(Errc::SchemaError, "unknown key \"" + key + "\" in " + where);
    }
}

const Json& require(const Json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(Errc::SchemaError, "missing required key \"" + key + "\" in " + where);
    return *it;
}

std::string require_string(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = require(obj, key, where);
    if (!v.is_string()) throw Error(Errc::SchemaError, key + " must be a string in " + where);
    return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, const std::string& key, std::int64_t min, const std::string& what) {
    const Json& v = require(obj, key, "configuration");
    if (!v.is_number_integer()) throw Error(Errc::SchemaError, key + " must be " + what);
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(
                                                             std::numeric_limits<std::int64_t>::max()))
        throw Error(Errc::SchemaError, key + " is out of range");
    auto value = v.get<std::int64_t>();
    if (value < min) throw Error(Errc::SchemaError, key + " must be " + what);
    return value;
}

std::uint16_t require_port(const Json& obj, const std::string& key, const std::string& where) {
    const Json& v = require(obj, key, where);
    if (!v.is_number_integer()) throw Error(Errc::SchemaError, key + " must be an integer TCP port in " + where);
    auto value = v.get<std::int64_t>();
    if (value < 0 || value > 65535) throw Error(Errc::SchemaError, key + " is not a TCP port in " + where);
    return static_cast<std::uint16_t>(value);
}

NodeSpec parse_node(const Json& obj, bool miner, std::size_t index) {
    std::string where = std::string(miner ? "miners" : "clients") + "[" + std::to_string(index) + "]";
    if (!obj.is_object()) throw Error(Errc::SchemaError, where + " must be an object");
    reject_unknown(obj, miner ? kMinerKeys : kClientKeys, where);
    NodeSpec spec;
    spec.name = require_string(obj, "name", where);
    spec.host = require_string(obj, "host", where);
    spec.blockchain_port = require_port(obj, "blockchainPort", where);
    spec.admin_port = require_port(obj, "adminPort", where);
    if (miner) {
        spec.role = Role::Miner;
    } else {
        auto role = require_string(obj, "role", where);
        if (role == "prosumer")
            spec.role = Role::Prosumer;
        else if (role == "dso")
            spec.role = Role::Dso;
        else
            throw Error(Errc::SchemaError, "role must be \"prosumer\" or \"dso\" in " + where + ", got \"" + role + "\"");
        spec.wrapper_port = require_port(obj, "wrapperPort", where);
    }
    return spec;
}

std::vector<NodeSpec> parse_nodes(const Json& doc, const std::string& key, bool miner) {
    const Json& arr = require(doc, key, "configuration");
    if (!arr.is_array()) throw Error(Errc::SchemaError, key + " must be an array");
    std::vector<NodeSpec> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_node(arr[i], miner, i));
    return out;
}

Json node_json(const NodeSpec& n) {
    Json j = {{"name", n.name}, {"host", n.host}, {"blockchainPort", n.blockchain_port}, {"adminPort", n.admin_port}};
    if (!n.is_miner()) {
        j["role"] = std::string(role_name(n.role));
        if (n.wrapper_port) j["wrapperPort"] = *n.wrapper_port;
    }
    return j;
}

std::string normalize_host(std::string host) {
    std::transform(host.begin(), host.end(), host.begin(), [](unsigned char c) { return std::tolower(c); });
    if (host == "localhost") return "127.0.0.1";
    return host;
}

struct IssueKey {
    std::string code;
    std::vector<std::string> nodes;
    auto operator<=>(const IssueKey&) const = default;
};

class IssueSet {
public:
    void add(std::string_view code, std::vector<std::string> nodes, std::string message) {
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        IssueKey key{std::string(code), nodes};
        if (issues_.contains(key)) return;
        issues_.emplace(std::move(key), Issue{std::string(code), std::move(message), std::move(nodes)});
    }

    // std::map ordering on (code, nodes) gives the report order.
    std::vector<Issue> take() {
        std::vector<Issue> out;
        for (auto& [_, issue] : issues_) out.push_back(std::move(issue));
        return out;
    }

private:
    std::map<IssueKey, Issue> issues_;
};

}  // namespace

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Prosumer: return "prosumer";
        case Role::Dso: return "dso";
        case Role::Miner: return "miner";
    }
    return "unknown";
}

std::vector<std::uint16_t> NodeSpec::ports() const {
    std::vector<std::uint16_t> out{blockchain_port, admin_port};
    if (wrapper_port) out.push_back(*wrapper_port);
    return out;
}

std::vector<const NodeSpec*> NetworkConfig::all_nodes() const {
    std::vector<const NodeSpec*> out;
    for (const auto& m : miners) out.push_back(&m);
    for (const auto& c : clients) out.push_back(&c);
    return out;
}

bool valid_identifier(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

NetworkConfig parse_config(std::string_view text) {
    Json doc = parse_json(text);
    if (!doc.is_object()) throw Error(Errc::SchemaError, "configuration must be a JSON object");
    reject_unknown(doc, kTopKeys, "configuration");

    NetworkConfig config;
    config.configuration_name = require_string(doc, "configurationName", "configuration");
    config.configuration_version = require_string(doc, "configurationVersion", "configuration");
    config.genesis.chain_id = require_int(doc, "chainID", 1, "positive integer");
    config.genesis.difficulty = require_int(doc, "difficulty", 1, "positive integer");
    config.genesis.gas_limit = require_int(doc, "gasLimit", 1, "positive integer");
    config.genesis.balance = require_int(doc, "balance", 0, "non-negative integer");
    config.clients = parse_nodes(doc, "clients", false);
    config.miners = parse_nodes(doc, "miners", true);
    return config;
}

NetworkConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string serialize_config(const NetworkConfig& config) {
    Json clients = Json::array();
    for (const auto& c : config.clients) clients.push_back(node_json(c));
    Json miners = Json::array();
    for (const auto& m : config.miners) miners.push_back(node_json(m));
    Json doc = {{"configurationName", config.configuration_name},
                {"configurationVersion", config.configuration_version},
                {"chainID", config.genesis.chain_id},
                {"difficulty", config.genesis.difficulty},
                {"gasLimit", config.genesis.gas_limit},
                {"balance", config.genesis.balance},
                {"clients", clients},
                {"miners", miners}};
    return canonical(doc);
}

ValidationReport validate(const NetworkConfig& config) {
    IssueSet errors;
    IssueSet warnings;
    auto nodes = config.all_nodes();

    std::vector<std::string> everyone;
    for (const auto* n : nodes) everyone.push_back(n->name);

    if (!valid_identifier(config.configuration_name))
        errors.add(kInvalidName, everyone,
                   "configurationName \"" + config.configuration_name + "\" must be non-empty [A-Za-z0-9_-]");
    if (config.clients.empty()) errors.add(kNoClients, everyone, "network needs at least one client");
    if (config.miners.empty()) errors.add(kNoMiners, everyone, "network needs at least one miner");

    const auto& g = config.genesis;
    if (g.chain_id < 1 || g.difficulty < 1 || g.gas_limit < 1 || g.balance < 0)
        errors.add(kGenesisRange, everyone, "chainID, difficulty and gasLimit must be >= 1 and balance >= 0");
    if (g.chain_id >= 1 && g.chain_id <= 4)
        warnings.add(kChainIdReserved, {},
                     "chainID " + std::to_string(g.chain_id) + " is reserved for a public network");

    for (const auto& c : config.clients)
        if (c.is_miner()) errors.add(kRoleMismatch, {c.name}, "client " + c.name + " has role miner");
    for (const auto& m : config.miners)
        if (!m.is_miner()) errors.add(kRoleMismatch, {m.name}, "miner " + m.name + " has a client role");

    std::map<std::string, int> name_count;
    for (const auto* n : nodes) ++name_count[n->name];
    for (const auto& [name, count] : name_count)
        if (count > 1) errors.add(kDuplicateName, {name}, "node name \"" + name + "\" is used " +
                                                               std::to_string(count) + " times");

    // (host, port) -> owning node names, one entry per declared port.
    std::map<std::pair<std::string, std::uint16_t>, std::vector<std::string>> owners;
    for (const auto* n : nodes) {
        if (!valid_identifier(n->name))
            errors.add(kInvalidName, {n->name}, "node name \"" + n->name + "\" must be non-empty [A-Za-z0-9_-]");
        if (n->is_miner() && n->wrapper_port)
            errors.add(kRoleMismatch, {n->name}, "miner " + n->name + " must not declare a wrapper port");
        if (!n->is_miner() && !n->wrapper_port)
            errors.add(kMissingWrapperPort, {n->name}, "client " + n->name + " has no wrapper port");

        auto ports = n->ports();
        for (auto p : ports) {
            if (p < 1024)
                errors.add(kPortRange, {n->name},
                           "node " + n->name + " port " + std::to_string(p) + " is outside 1024-65535");
        }
        std::set<std::uint16_t> distinct(ports.begin(), ports.end());
        if (distinct.size() != ports.size())
            errors.add(kPortDuplicate, {n->name}, "node " + n->name + " declares the same port twice");
        for (auto p : distinct) owners[{normalize_host(n->host), p}].push_back(n->name);
    }

    for (const auto& [where, names] : owners) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            for (std::size_t j = i + 1; j < names.size(); ++j) {
                if (names[i] == names[j]) continue;
                errors.add(kPortConflict, {names[i], names[j]},
                           names[i] + " and " + names[j] + " both request " + where.first + ":" +
                               std::to_string(where.second));
            }
        }
    }

    return ValidationReport{errors.take(), warnings.take()};
}

const NodeSpec& node_lookup(const NetworkConfig& config, std::string_view name) {
    for (const auto* n : config.all_nodes())
        if (n->name == name) return *n;
    throw Error(Errc::NotFound, "no node named \"" + std::string(name) + "\"");
}

}  // namespace tnet::dsl
