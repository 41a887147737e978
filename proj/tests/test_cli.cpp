#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef WEB3DB_SIM_BINARY
#define WEB3DB_SIM_BINARY "web3db-sim"
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
    CliResult result;
    std::string command = std::string(WEB3DB_SIM_BINARY) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
        result.stdout_text.append(buffer, n);
    }
    int status = pclose(pipe);
    result.exit_code = WEXITSTATUS(status);
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "web3db-cli-XXXXXX").string();
        path = mkdtemp(tmpl.data());
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("keygen writes a deterministic keyfile for fixed entropy") {
    TempDir dir;
    std::string entropy(64, 'b');
    fs::path key1 = dir.path / "k1.json";
    fs::path key2 = dir.path / "k2.json";
    CHECK(run_cli("keygen --out " + key1.string() + " --entropy " + entropy).exit_code == 0);
    CHECK(run_cli("keygen --out " + key2.string() + " --entropy " + entropy).exit_code == 0);
    CHECK(read_file(key1) == read_file(key2));
    auto j = nlohmann::json::parse(read_file(key1));
    CHECK(j["pk"].get<std::string>().size() == 64);
    CHECK(j["sk"].get<std::string>().size() == 128);
}

TEST_CASE("query subcommand persists state and maps statuses to exit codes") {
    TempDir dir;
    fs::path alice = dir.path / "alice.json";
    fs::path bob = dir.path / "bob.json";
    fs::path db = dir.path / "db";
    REQUIRE(run_cli("keygen --out " + alice.string() + " --entropy " + std::string(64, 'a'))
                .exit_code == 0);
    REQUIRE(run_cli("keygen --out " + bob.string() + " --entropy " + std::string(64, 'c'))
                .exit_code == 0);

    std::string base = "query --db " + db.string() + " --user ";
    CHECK(run_cli(base + alice.string() + " --sql \"CREATE TABLE pets (name text, age integer)\"")
              .exit_code == 0);
    CHECK(run_cli(base + alice.string() +
                  " --sql \"INSERT INTO pets VALUES ('rex', 3), ('ivy', 2)\"")
              .exit_code == 0);

    CliResult select = run_cli(base + alice.string() +
                               " --sql \"SELECT name, age FROM pets ORDER BY age DESC\"");
    CHECK(select.exit_code == 0);
    CHECK(select.stdout_text == "name,age\nrex,3\nivy,2\n");

    // A stranger is denied: exit code 2.
    CHECK(run_cli(base + bob.string() + " --sql \"SELECT name FROM pets\"").exit_code == 2);

    // Parse errors exit 1.
    CHECK(run_cli(base + alice.string() + " --sql \"SELEKT\"").exit_code == 1);
}

TEST_CASE("run subcommand writes a deterministic report") {
    TempDir dir;
    fs::path cfg_path = dir.path / "cfg.json";
    nlohmann::json cfg;
    cfg["node_count"] = 5;
    cfg["genesis_weight_count"] = 3;
    cfg["quorum_size"] = 3;
    cfg["gossip_fanout"] = 2;
    cfg["rng_seed"] = "cli-test";
    cfg["workload"] = {{{"user", "alice"}, {"sql", "CREATE TABLE t (a integer)"}},
                       {{"user", "alice"}, {"sql", "INSERT INTO t VALUES (1), (2)"}},
                       {{"user", "alice"}, {"sql", "SELECT COUNT(*) FROM t"}}};
    std::ofstream(cfg_path) << cfg.dump(2);

    fs::path report1 = dir.path / "r1.json";
    fs::path report2 = dir.path / "r2.json";
    CHECK(run_cli("run --config " + cfg_path.string() + " --report " + report1.string())
              .exit_code == 0);
    CHECK(run_cli("run --config " + cfg_path.string() + " --report " + report2.string())
              .exit_code == 0);
    std::string a = read_file(report1);
    CHECK(a == read_file(report2));

    auto parsed = nlohmann::json::parse(a);
    CHECK(parsed["total_rounds"] == 3);
    CHECK(parsed["ok_rounds"] == 3);
    CHECK(parsed["cache_total_bytes"] == 0);
}

TEST_CASE("sortition-stats emits parseable selection frequencies") {
    CliResult stats = run_cli("sortition-stats --nodes 4 --rounds 100 --seed cli-test");
    CHECK(stats.exit_code == 0);
    auto j = nlohmann::json::parse(stats.stdout_text);
    CHECK(j["nodes"] == 4);
    CHECK(j["rounds"] == 100);
    CHECK(j["per_node"].size() == 4);

    // Weight/total overrides feed through.
    CliResult single = run_cli("sortition-stats --nodes 1 --rounds 50 --weight 1 --total 1");
    auto js = nlohmann::json::parse(single.stdout_text);
    CHECK(js["per_node"][0]["selected"] == 50);  // p = 1: always selected
}

TEST_CASE("invalid config is rejected with a nonzero exit") {
    TempDir dir;
    fs::path cfg_path = dir.path / "bad.json";
    std::ofstream(cfg_path) << "{\"node_count\": 1}";
    fs::path report = dir.path / "r.json";
    CHECK(run_cli("run --config " + cfg_path.string() + " --report " + report.string())
              .exit_code == 1);
}
