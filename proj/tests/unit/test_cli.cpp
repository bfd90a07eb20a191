/*
 * test_cli.cpp
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

#include <fstream>
#include <sstream>

#include "support/test_support.hpp"
#include "tnet/process.hpp"

using namespace tnet;
namespace fs = std::filesystem;

namespace {

struct Cli {
    testing::TempDir dir{"tnet-cli"};
    fs::path config_path;

    explicit Cli(const dsl::NetworkConfig& config) {
        config_path = dir.path() / "net.json";
        write_file_atomic(config_path, dsl::serialize_config(config));
    }
    ProcessResult run(std::vector<std::string> args, bool with_config = true) const {
        args.insert(args.begin(), TNET_NETMGR_PATH);
        if (with_config) args.insert(args.end(), {"--config", config_path.string(), "--workspace", (dir.path() / "ws").string()});
        return run_process(args, std::chrono::seconds(120));
    }
};

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("netmgr validate") {
    auto config = testing::local_config("clival", 2);
    SUBCASE("valid config") {
        Cli cli(config);
        auto r = cli.run({"validate", "--json", (cli.dir.path() / "v.json").string()});
        CHECK(r.exit_status == 0);
        auto j = parse_json(read_file(cli.dir.path() / "v.json"));
        CHECK(j.at("deployable").get<bool>());
        CHECK(j.at("errors").empty());
    }
    SUBCASE("port conflict") {
        config.clients[2].admin_port = config.clients[1].blockchain_port;
        Cli cli(config);
        auto r = cli.run({"validate"});
        CHECK(r.exit_status == 1);
        CHECK(r.output.find("PORT_CONFLICT") != std::string::npos);
    }
    SUBCASE("malformed file") {
        Cli cli(config);
        write_file_atomic(cli.config_path, "{\"configurationName\": ");
        auto r = cli.run({"validate"});
        CHECK(r.exit_status == 1);
        CHECK(r.output.find("SyntaxError") != std::string::npos);
    }
}

TEST_CASE("netmgr usage errors") {
    Cli cli(testing::local_config("cliuse", 1));
    auto unknown = cli.run({"frobnicate"}, false);
    CHECK(unknown.exit_status == 64);
    CHECK(unknown.output.find("Subcommands") != std::string::npos);
    CHECK(cli.run({"create", "--bogus"}).exit_status == 64);
    CHECK(cli.run({"create"}, false).exit_status == 64);
    CHECK(cli.run({"create", "--executor", "telnet"}).exit_status == 64);
    CHECK(cli.run({"run-tes", "--seed", "1", "--fault", "99:prosumer1:none"}).exit_status == 64);
    CHECK(cli.run({"run-tes", "--seed", "1", "--fault", "3:nobody:none"}).exit_status == 1);
    CHECK(cli.run({"--help"}, false).exit_status == 0);
}

TEST_CASE("netmgr lifecycle with timing csv") {
    Cli cli(testing::local_config("clilife", 2));
    auto csv = cli.dir.path() / "create.csv";
    auto r = cli.run({"create", "--csv", csv.string()});
    REQUIRE(r.exit_status == 0);
    for (auto label : {"Clients Create", "Miners Create", "Blockchain Make", "Blockchain Create",
                       "Distribute to Clients", "Distribute to Miners", "Full Network Created"})
        CHECK_MESSAGE(r.output.find(label) != std::string::npos, label);
    auto rows = lines(read_file(csv));
    REQUIRE(rows.size() == 8);
    CHECK(rows[0] == "phase,node_count,rep,duration_seconds");
    CHECK(rows[1].rfind("Clients Create,3,1,", 0) == 0);
    // Logs never reach the machine output.
    for (const auto& row : rows) CHECK(row.find("info") == std::string::npos);

    CHECK(cli.run({"create"}).exit_status == 2);
    CHECK(cli.run({"stop"}).exit_status == 2);
    CHECK(cli.run({"start-miners"}).exit_status == 0);
    CHECK(cli.run({"start-clients"}).exit_status == 0);
    CHECK(cli.run({"connect"}).exit_status == 0);
    CHECK(cli.run({"delete"}).exit_status == 2);
    auto stop = cli.run({"stop", "--json", (cli.dir.path() / "stop.json").string()});
    CHECK(stop.exit_status == 0);
    auto j = parse_json(read_file(cli.dir.path() / "stop.json"));
    CHECK(j.at("phases").at(0).at("phase") == "Network Stop");
    CHECK(cli.run({"delete"}).exit_status == 0);
}

TEST_CASE("netmgr audit rejects a report for another network") {
    Cli cli(testing::local_config("cliaudit", 1));
    auto report = cli.dir.path() / "r.json";
    write_file_atomic(report, R"({"configurationName":"other","seed":1,"tariff":{"buyPrice":30,"sellPrice":5},)"
                              R"("intervals":[],"digestChain":"","settlement":{}})");
    CHECK(cli.run({"audit", "--report", report.string()}).exit_status == 1);
}
