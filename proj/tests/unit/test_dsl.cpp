/*
 * test_dsl.cpp
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

#include <doctest.h>

#include <random>
#include <set>

#include "tnet/dsl/config.hpp"
#include "tnet/error.hpp"

using namespace tnet;
using namespace tnet::dsl;

namespace {

const char* kFourNode = R"({
  "configurationName": "net",
  "configurationVersion": "1",
  "chainID": 5871,
  "difficulty": 400,
  "gasLimit": 21000,
  "balance": 1000,
  "clients": [
    {"name": "dso1", "role": "dso", "host": "10.0.0.1", "blockchainPort": 30303, "adminPort": 8545, "wrapperPort": 9000},
    {"name": "prosumer1", "role": "prosumer", "host": "10.0.0.2", "blockchainPort": 30303, "adminPort": 8545, "wrapperPort": 9000},
    {"name": "prosumer2", "role": "prosumer", "host": "10.0.0.3", "blockchainPort": 30303, "adminPort": 8545, "wrapperPort": 9000}
  ],
  "miners": [
    {"name": "miner1", "host": "10.0.0.4", "blockchainPort": 30303, "adminPort": 8545}
  ]
})";

Errc parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

std::string error_text(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

/// Random valid config; every node on its own host or with distinct ports.
NetworkConfig random_config(std::mt19937_64& rng, int nodes) {
    NetworkConfig c;
    c.configuration_name = "gen" + std::to_string(rng() % 1000);
    c.configuration_version = std::to_string(rng() % 10);
    c.genesis = {static_cast<std::int64_t>(5 + rng() % 10000), static_cast<std::int64_t>(1 + rng() % 5000),
                 static_cast<std::int64_t>(1 + rng() % 100000), static_cast<std::int64_t>(rng() % 100000)};
    std::uint16_t next_port = 2000;
    const int hosts = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < nodes; ++i) {
        NodeSpec n;
        n.name = "n" + std::to_string(i);
        n.host = "host" + std::to_string(rng() % hosts);
        n.blockchain_port = next_port++;
        n.admin_port = next_port++;
        if (i == 0) {
            n.role = Role::Miner;
            c.miners.push_back(n);
        } else {
            n.role = (rng() % 4 == 0) ? Role::Dso : Role::Prosumer;
            n.wrapper_port = next_port++;
            c.clients.push_back(n);
        }
    }
    return c;
}

}  // namespace

TEST_CASE("parse_config mirrors the document field for field") {
    auto c = parse_config(kFourNode);
    CHECK(c.configuration_name == "net");
    CHECK(c.configuration_version == "1");
    CHECK(c.genesis == GenesisParams{5871, 400, 21000, 1000});
    REQUIRE(c.clients.size() == 3);
    REQUIRE(c.miners.size() == 1);
    CHECK(c.clients[0].role == Role::Dso);
    CHECK(c.clients[1].role == Role::Prosumer);
    CHECK(c.clients[1].host == "10.0.0.2");
    CHECK(c.clients[1].wrapper_port == 9000);
    CHECK(c.miners[0].role == Role::Miner);
    CHECK_FALSE(c.miners[0].wrapper_port.has_value());
}

TEST_CASE("parse_config schema errors") {
    SUBCASE("missing gasLimit names the key") {
        auto text = replace(kFourNode, "\"gasLimit\": 21000,", "");
        CHECK(parse_error(text) == Errc::SchemaError);
        CHECK(error_text(text).find("gasLimit") != std::string::npos);
    }
    SUBCASE("non-integer chainID") {
        auto text = replace(kFourNode, "5871", "\"abc\"");
        CHECK(parse_error(text) == Errc::SchemaError);
        CHECK(error_text(text).find("chainID must be positive integer") != std::string::npos);
    }
    SUBCASE("zero difficulty") { CHECK(parse_error(replace(kFourNode, "400", "0")) == Errc::SchemaError); }
    SUBCASE("unknown top-level key") {
        CHECK(parse_error(replace(kFourNode, "\"balance\"", "\"bonus\": 1, \"balance\"")) == Errc::SchemaError);
    }
    SUBCASE("miner may not carry wrapperPort") {
        CHECK(parse_error(replace(kFourNode, "\"adminPort\": 8545}", "\"adminPort\": 8545, \"wrapperPort\": 1}")) ==
              Errc::SchemaError);
    }
    SUBCASE("unknown role") { CHECK(parse_error(replace(kFourNode, "\"dso\"", "\"grid\"")) == Errc::SchemaError); }
    SUBCASE("port beyond 65535") { CHECK(parse_error(replace(kFourNode, "8545}", "70000}")) == Errc::SchemaError); }
}

TEST_CASE("parse_config syntax errors carry a position") {
    auto text = replace(kFourNode, "\"difficulty\": 400,", "\"difficulty\": 400,,");
    CHECK(parse_error(text) == Errc::SyntaxError);
    CHECK(error_text(text).find("line 5, column 21") != std::string::npos);
}

TEST_CASE("validate: valid four-node config is clean") {
    auto report = validate(parse_config(kFourNode));
    CHECK(report.errors.empty());
    CHECK(report.warnings.empty());
    CHECK(report.deployable());
}

TEST_CASE("validate: two clients on the same host and port") {
    auto c = parse_config(kFourNode);
    c.clients[2].host = c.clients[1].host;
    auto report = validate(c);
    // Same host now shares all three ports between prosumer1 and prosumer2.
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].code == kPortConflict);
    CHECK(report.errors[0].nodes == std::vector<std::string>{"prosumer1", "prosumer2"});
}

TEST_CASE("validate: localhost and 127.0.0.1 are the same host") {
    auto c = parse_config(kFourNode);
    c.clients[0].host = "localhost";
    c.clients[1].host = "127.0.0.1";
    auto report = validate(c);
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].code == kPortConflict);
}

TEST_CASE("validate: reserved chain ids warn but stay deployable") {
    auto c = parse_config(kFourNode);
    for (std::int64_t id : {1, 2, 3, 4}) {
        c.genesis.chain_id = id;
        auto report = validate(c);
        CHECK(report.deployable());
        REQUIRE(report.warnings.size() == 1);
        CHECK(report.warnings[0].code == kChainIdReserved);
    }
    c.genesis.chain_id = 5;
    CHECK(validate(c).warnings.empty());
}

TEST_CASE("validate: structural errors") {
    auto c = parse_config(kFourNode);
    SUBCASE("duplicate names") {
        c.clients[2].name = "prosumer1";
        auto r = validate(c);
        REQUIRE_FALSE(r.errors.empty());
        CHECK(r.errors[0].code == kDuplicateName);
    }
    SUBCASE("privileged port") {
        c.clients[0].admin_port = 80;
        auto r = validate(c);
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].code == kPortRange);
        CHECK(r.errors[0].nodes == std::vector<std::string>{"dso1"});
    }
    SUBCASE("ports within one node must differ") {
        c.miners[0].admin_port = c.miners[0].blockchain_port;
        auto r = validate(c);
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].code == kPortDuplicate);
    }
    SUBCASE("no miners") {
        c.miners.clear();
        auto r = validate(c);
        REQUIRE(r.errors.size() == 1);
        CHECK(r.errors[0].code == kNoMiners);
    }
}

TEST_CASE("validate: ordering is by code then node name, and deterministic") {
    auto c = parse_config(kFourNode);
    c.clients[1].host = c.clients[0].host;  // dso1 vs prosumer1
    c.clients[2].admin_port = 1000;
    auto r1 = validate(c);
    auto r2 = validate(c);
    CHECK(r1 == r2);
    REQUIRE(r1.errors.size() == 2);
    CHECK(r1.errors[0].code == kPortConflict);
    CHECK(r1.errors[1].code == kPortRange);
}

TEST_CASE("node_lookup") {
    auto c = parse_config(kFourNode);
    CHECK(node_lookup(c, "dso1").role == Role::Dso);
    CHECK_FALSE(node_lookup(c, "miner1").wrapper_port.has_value());
    try {
        node_lookup(c, "ghost");
        FAIL("expected NotFound");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotFound);
    }
}

TEST_CASE("property: serialize/parse round trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        auto c = random_config(rng, 2 + static_cast<int>(rng() % 8));
        auto once = parse_config(serialize_config(c));
        CHECK(once == c);
        CHECK(parse_config(serialize_config(once)) == once);
    }
    auto parsed = parse_config(kFourNode);
    CHECK(parse_config(serialize_config(parsed)) == parsed);
}

TEST_CASE("property: k injected collisions give exactly k PORT_CONFLICT errors") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        int k = static_cast<int>(rng() % 6);
        auto c = random_config(rng, 2 * k + 2 + static_cast<int>(rng() % 4));
        std::vector<NodeSpec*> nodes;
        for (auto& m : c.miners) nodes.push_back(&m);
        for (auto& n : c.clients) nodes.push_back(&n);
        std::shuffle(nodes.begin(), nodes.end(), rng);
        for (int i = 0; i < k; ++i) {
            NodeSpec* a = nodes[2 * i];
            NodeSpec* b = nodes[2 * i + 1];
            b->host = a->host;
            b->admin_port = a->blockchain_port;
        }
        auto r = validate(c);
        auto conflicts = std::count_if(r.errors.begin(), r.errors.end(),
                                       [](const Issue& e) { return e.code == kPortConflict; });
        CHECK(conflicts == k);
        CHECK(r.errors.size() == static_cast<std::size_t>(k));
        std::set<std::string> names;
        for (auto* n : nodes) names.insert(n->name);
        for (const auto& e : r.errors) {
            REQUIRE_FALSE(e.nodes.empty());
            for (const auto& n : e.nodes) CHECK(names.contains(n));
        }
    }
}
