#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "web3db/orchestrator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace web3db;
using namespace web3db::orchestrator;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << content;
}

vrf::KeyPair load_keyfile(const fs::path& path) {
    json j = json::parse(read_file(path));
    vrf::KeyPair kp;
    kp.pk = PublicKey::from_hex_str(j.at("pk"));
    kp.sk = SecretKey::from_hex_str(j.at("sk"));
    if (public_key_of(kp.sk) != kp.pk) {
        throw KeyError("keyfile pk does not match sk");
    }
    return kp;
}

int cmd_keygen(const std::string& out_path, const std::string& entropy_hex) {
    Bytes entropy;
    if (!entropy_hex.empty()) {
        entropy = from_hex(entropy_hex);
    } else {
        std::random_device rd;
        for (int i = 0; i < 8; ++i) {
            std::uint32_t word = rd();
            for (int b = 0; b < 4; ++b) {
                entropy.push_back(static_cast<std::uint8_t>((word >> (8 * b)) & 0xff));
            }
        }
    }
    vrf::KeyPair kp = vrf::keygen(entropy);
    json j;
    j["pk"] = kp.pk.hex();
    j["sk"] = kp.sk.hex();
    write_file(out_path, j.dump(2) + "\n");
    std::cout << "wrote " << out_path << " (pk " << kp.pk.short_hex() << "...)\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& report_path) {
    SimulationConfig cfg = SimulationConfig::from_json(read_file(config_path));
    Simulation sim(cfg);
    std::string report = sim.run_and_report();
    write_file(report_path, report);

    json parsed = json::parse(report);
    std::cout << "rounds: " << parsed["total_rounds"] << " (" << parsed["ok_rounds"]
              << " ok), report: " << report_path << "\n";
    for (const auto& lc : parsed["rounds"]) {
        std::cout << "  round " << lc["round"] << " [" << lc["status"].get<std::string>() << "] "
                  << lc["sql"].get<std::string>() << "\n";
    }
    return 0;
}

int cmd_sortition_stats(std::uint32_t nodes, std::uint64_t rounds, std::uint64_t weight,
                        std::uint64_t total, const std::string& seed) {
    SortitionStats stats = run_sortition_stats(nodes, rounds, weight, total, seed);
    std::cout << stats.to_json();
    return 0;
}

// --- query mode persistence ---

struct DbState {
    SimulationConfig config;
    std::uint64_t round = 0;
    sortition::RoundSeed seed;
    std::map<std::string, CatalogEntry> catalog;
    std::vector<JournalEntry> journal;
};

constexpr std::uint32_t kDefaultRowsPerBlock = 128;

DbState load_state(const fs::path& dir) {
    json j = json::parse(read_file(dir / "state.json"));
    DbState state;
    state.config = SimulationConfig::from_json(j.at("config").dump());
    state.round = j.at("round");
    state.seed.round = j.at("seed").at("round");
    state.seed.value = from_hex(j.at("seed").at("value"));
    state.seed.proof = from_hex(j.at("seed").at("proof"));
    for (const auto& entry : j.at("catalog")) {
        CatalogEntry ce;
        ce.owner = PublicKey::from_hex_str(entry.at("owner"));
        ce.manifest = Digest256::from_hex_str(entry.at("manifest"));
        state.catalog[entry.at("table")] = ce;
    }
    for (const auto& entry : j.at("journal")) {
        JournalEntry je;
        je.op = entry.at("op");
        je.a = PublicKey::from_hex_str(entry.at("a"));
        if (entry.contains("b")) {
            je.b = PublicKey::from_hex_str(entry.at("b"));
        }
        if (entry.contains("h1")) {
            je.h1 = Digest256::from_hex_str(entry.at("h1"));
        }
        if (entry.contains("h2")) {
            je.h2 = Digest256::from_hex_str(entry.at("h2"));
        }
        if (entry.contains("sig")) {
            je.sig = from_hex(entry.at("sig"));
        }
        state.journal.push_back(std::move(je));
    }
    return state;
}

void save_state(const fs::path& dir, Simulation& sim) {
    json j;
    j["config"] = json::parse(sim.config().to_json());
    j["round"] = sim.next_round();
    j["seed"] = {{"round", sim.current_seed().round},
                 {"value", to_hex(sim.current_seed().value)},
                 {"proof", to_hex(sim.current_seed().proof)}};
    j["catalog"] = json::array();
    for (const auto& [table, entry] : sim.catalog()) {
        j["catalog"].push_back({{"table", table},
                                {"owner", entry.owner.hex()},
                                {"manifest", entry.manifest.hex()}});
    }
    j["journal"] = json::array();
    for (const auto& entry : sim.journal()) {
        json e;
        e["op"] = entry.op;
        e["a"] = entry.a.hex();
        e["b"] = entry.b.hex();
        e["h1"] = entry.h1.hex();
        e["h2"] = entry.h2.hex();
        e["sig"] = to_hex(entry.sig);
        j["journal"].push_back(e);
    }
    write_file(dir / "state.json", j.dump(2) + "\n");

    fs::create_directories(dir / "blocks");
    for (const auto& [hash, bytes] : sim.store().export_blocks()) {
        fs::path block_path = dir / "blocks" / (hash.hex() + ".bin");
        if (!fs::exists(block_path)) {
            std::ofstream out(block_path, std::ios::binary);
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        }
    }
}

int cmd_query(const std::string& db_dir, const std::string& keyfile, const std::string& sql,
              std::uint32_t nodes) {
    fs::path dir(db_dir);
    vrf::KeyPair user = load_keyfile(keyfile);

    std::optional<DbState> state;
    if (fs::exists(dir / "state.json")) {
        state = load_state(dir);
    } else {
        fs::create_directories(dir);
        DbState fresh;
        fresh.config.node_count = nodes;
        fresh.config.genesis_weight_count = std::max<std::uint32_t>(1, nodes / 2);
        fresh.config.quorum_size = 3;
        fresh.config.gossip_fanout = std::min<std::uint32_t>(3, nodes - 1);
        fresh.config.rng_seed = "db:" + dir.filename().string();
        fresh.config.rows_per_block = kDefaultRowsPerBlock;
        fresh.config.replication_factor = std::min<std::uint32_t>(3, nodes);
        state = fresh;
    }

    Simulation sim(state->config);
    if (fs::exists(dir / "blocks")) {
        for (const auto& entry : fs::directory_iterator(dir / "blocks")) {
            std::string content = read_file(entry.path());
            sim.store().put(Bytes(content.begin(), content.end()));
        }
    }
    if (!state->journal.empty()) {
        sim.restore_journal(state->journal);
    }
    if (!state->catalog.empty()) {
        sim.restore_catalog(state->catalog);
    }
    if (state->round > 0) {
        sim.restore_round(state->round, state->seed);
    }

    QueryLifecycle lc = sim.submit_query(user, sql);
    save_state(dir, sim);

    std::cerr << "round " << lc.round << ": " << lifecycle_status_name(lc.status);
    if (!lc.detail.empty()) {
        std::cerr << " (" << lc.detail << ")";
    }
    std::cerr << "\n";
    switch (lc.status) {
        case LifecycleStatus::ok:
            std::cout << lc.result->to_csv();
            return 0;
        case LifecycleStatus::access_denied:
            return 2;
        case LifecycleStatus::no_master_retry_exhausted:
            return 3;
        case LifecycleStatus::incomplete:
            return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"web3db-sim: decentralized query coordination simulator"};
    app.require_subcommand(1);

    auto* keygen = app.add_subcommand("keygen", "generate a user keyfile");
    std::string keygen_out;
    std::string keygen_entropy;
    keygen->add_option("--out", keygen_out, "output keyfile path")->required();
    keygen->add_option("--entropy", keygen_entropy, "32-byte hex entropy (random when omitted)");

    auto* run = app.add_subcommand("run", "run a configured workload and write a report");
    std::string run_config;
    std::string run_report;
    run->add_option("--config", run_config, "simulation config JSON")->required();
    run->add_option("--report", run_report, "report output path")->required();

    auto* stats = app.add_subcommand("sortition-stats", "selection frequency statistics");
    std::uint32_t stats_nodes = 10;
    std::uint64_t stats_rounds = 10000;
    std::uint64_t stats_weight = 1;
    std::uint64_t stats_total = 0;
    std::string stats_seed = "sortition-stats";
    stats->add_option("--nodes", stats_nodes, "node count")->required();
    stats->add_option("--rounds", stats_rounds, "round count")->required();
    stats->add_option("--weight", stats_weight, "per-node weight (default 1)");
    stats->add_option("--total", stats_total, "total weight W (default nodes*weight)");
    stats->add_option("--seed", stats_seed, "seed text");

    auto* query = app.add_subcommand("query", "run one query against a persistent database dir");
    std::string query_db;
    std::string query_user;
    std::string query_sql;
    std::uint32_t query_nodes = 6;
    query->add_option("--db", query_db, "database directory")->required();
    query->add_option("--user", query_user, "user keyfile")->required();
    query->add_option("--sql", query_sql, "query text")->required();
    query->add_option("--nodes", query_nodes, "engine node count when creating a new db");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) {
            return cmd_keygen(keygen_out, keygen_entropy);
        }
        if (*run) {
            return cmd_run(run_config, run_report);
        }
        if (*stats) {
            return cmd_sortition_stats(stats_nodes, stats_rounds, stats_weight, stats_total,
                                       stats_seed);
        }
        if (*query) {
            return cmd_query(query_db, query_user, query_sql, query_nodes);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
