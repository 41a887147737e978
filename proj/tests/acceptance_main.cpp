// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "support/corpus.hpp"
#include "support/fixtures.hpp"
#include "support/stats.hpp"
#include "web3db/engine/execute.hpp"
#include "web3db/engine/parser.hpp"
#include "web3db/gossip.hpp"
#include "web3db/orchestrator.hpp"
#include "web3db/sortition.hpp"
#include "web3db/storage.hpp"

#ifndef WEB3DB_SIM_BINARY
#define WEB3DB_SIM_BINARY "web3db-sim"
#endif

using namespace web3db;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    if (!pass) {
        ++failures;
    }
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string run_cli(const std::string& args) {
    std::string command = std::string(WEB3DB_SIM_BINARY) + " " + args;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) {
        return "";
    }
    std::string output;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
        output.append(buffer, n);
    }
    pclose(pipe);
    return output;
}

// --- criterion 1: sortition distribution via the CLI ---
void criterion_1() {
    auto start = Clock::now();
    std::string output = run_cli("sortition-stats --nodes 10 --rounds 10000");
    double elapsed = seconds_since(start);
    bool pass = true;
    std::ostringstream detail;
    try {
        auto j = nlohmann::json::parse(output);
        for (const auto& node : j["per_node"]) {
            double freq = node["frequency"];
            if (std::abs(freq - 0.100) > 0.010) {
                pass = false;
                detail << " node freq " << freq << " outside 0.100 +/- 0.010;";
            }
        }
        double fraction = j["candidate_fraction"];
        if (std::abs(fraction - 0.6513) > 0.015) {
            pass = false;
            detail << " candidate fraction " << fraction << " outside 0.6513 +/- 0.015;";
        }
    } catch (const std::exception& e) {
        pass = false;
        detail << " cli output unparseable: " << e.what();
    }
    if (elapsed >= 30.0) {
        pass = false;
        detail << " runtime " << elapsed << "s >= 30s;";
    }
    report(1, pass,
           "sortition-stats --nodes 10 --rounds 10000: per-node freq 0.100 +/- 0.010, "
           "candidate fraction 0.6513 +/- 0.015, runtime < 30s" +
               detail.str());
}

// --- criterion 2: verification round trip and mutation soundness ---
void criterion_2() {
    test_support::Rng rng(0xacce9702);
    int honest_ok = 0;
    int mutated_zero = 0;
    const int pairs = 1000;
    for (int i = 0; i < pairs; ++i) {
        auto kp = vrf::keygen(rng.next_bytes(32));
        sortition::RoundSeed seed = sortition::RoundSeed::genesis(rng.next_bytes(32));
        seed.round = rng.next_u64() % 1000000;
        sortition::SortitionProof sp = sortition::run_sortition(kp.sk, seed, 1, 2);
        if (sortition::verify_sortition(kp.pk, sp, seed, 1, 2) == sp.j) {
            ++honest_ok;
        }
        sortition::SortitionProof mutated = sp;
        mutated.proof[rng.next_below(mutated.proof.size())] ^=
            static_cast<std::uint8_t>(1 + rng.next_below(255));
        if (sortition::verify_sortition(kp.pk, mutated, seed, 1, 2) == 0) {
            ++mutated_zero;
        }
    }
    bool pass = honest_ok == pairs && mutated_zero == pairs;
    report(2, pass,
           "1000 random (keypair, seed): honest j returned " + std::to_string(honest_ok) +
               "/1000, mutated proofs rejected " + std::to_string(mutated_zero) + "/1000");
}

// --- criterion 3: binomial correctness ---
void criterion_3() {
    bool sums_ok = true;
    for (std::uint64_t w = 0; w <= 64 && sums_ok; ++w) {
        for (double p : {0.1, 0.3, 0.5, 0.9}) {
            double sum = 0.0;
            for (std::uint64_t k = 0; k <= w; ++k) {
                sum += sortition::binomial_pmf(k, w, p);
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                sums_ok = false;
            }
        }
    }

    test_support::Rng rng(0xacce9703);
    const int samples = 100000;
    const std::uint64_t w = 5;
    const double p = 0.3;
    std::vector<double> observed(w + 1, 0.0);
    for (int i = 0; i < samples; ++i) {
        observed[sortition::select_j(rng.next_unit(), w, p)] += 1.0;
    }
    std::vector<double> expected(w + 1);
    for (std::uint64_t k = 0; k <= w; ++k) {
        expected[k] = samples * sortition::binomial_pmf(k, w, p);
    }
    auto cs = test_support::chi_square(observed, expected);
    double critical = test_support::chi_square_critical_99(cs.degrees_of_freedom);
    bool chi_ok = cs.statistic < critical;

    std::ostringstream detail;
    detail << "pmf sums to 1 within 1e-12 for w <= 64" << (sums_ok ? "" : " [FAILED]")
           << "; select_j chi-square (w=5, p=0.3, 1e5 samples) " << cs.statistic << " < "
           << critical << " at significance 0.01" << (chi_ok ? "" : " [FAILED]");
    report(3, sums_ok && chi_ok, detail.str());
}

// --- criterion 4: oracle equivalence over the 30-query corpus ---
void criterion_4() {
    auto start = Clock::now();
    test_support::Rng rng(0xacce9704);
    std::map<std::string, Table> tables;
    tables["orders"] = test_support::make_orders(rng, 1000);
    tables["refs"] = test_support::make_refs(rng, 15);

    std::vector<std::string> corpus = test_support::query_corpus();
    bool pass = corpus.size() == 30;
    std::ostringstream detail;
    if (!pass) {
        detail << " corpus size " << corpus.size() << " != 30;";
    }
    for (const std::string& sql : corpus) {
        engine::QueryAst ast = engine::parse(sql);
        engine::QueryResult expected = engine::reference_execute(ast, tables);
        bool ordered = ast.select->order_by.has_value();
        for (std::uint32_t wc : {1u, 2u, 4u, 8u}) {
            engine::QueryResult got = test_support::run_distributed(ast, tables, wc);
            if (!test_support::results_match(got, expected, ordered)) {
                pass = false;
                detail << " mismatch at workers=" << wc << " for: " << sql << ";";
            }
        }
    }
    double elapsed = seconds_since(start);
    if (elapsed >= 120.0) {
        pass = false;
        detail << " runtime " << elapsed << "s >= 120s;";
    }
    report(4, pass,
           "30-query corpus over 1000-row tables matches reference at worker counts "
           "{1,2,4,8}, runtime < 2 min" +
               detail.str());
}

// --- criterion 5: ACL enforcement state machine ---
void criterion_5() {
    orchestrator::SimulationConfig cfg;
    cfg.node_count = 5;
    cfg.genesis_weight_count = 3;
    cfg.quorum_size = 3;
    cfg.gossip_fanout = 2;
    cfg.rng_seed = "acceptance-acl";
    orchestrator::Simulation sim(cfg);
    const auto& alice = sim.user("alice");
    const auto& bob = sim.user("bob");

    bool pass = true;
    std::ostringstream detail;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail << " " << what << " failed;";
        }
    };

    expect(sim.submit_query(alice, "CREATE TABLE acl_t (x integer)").status ==
               orchestrator::LifecycleStatus::ok,
           "create");
    expect(sim.submit_query(alice, "INSERT INTO acl_t VALUES (1), (2)").status ==
               orchestrator::LifecycleStatus::ok,
           "insert");

    // Deny before grant.
    expect(sim.submit_query(bob, "SELECT x FROM acl_t").status ==
               orchestrator::LifecycleStatus::access_denied,
           "deny-before-grant");

    // Allow after grant.
    storage::ContentHash h = sim.catalog().at("acl_t").manifest;
    sim.ledger().acl_grant(alice.pk, bob.pk, h,
                           sign_detached(alice.sk,
                                         ledger::Ledger::grant_payload(alice.pk, bob.pk, h)));
    expect(sim.submit_query(bob, "SELECT x FROM acl_t").status ==
               orchestrator::LifecycleStatus::ok,
           "allow-after-grant");

    // Grant follows the hash update.
    expect(sim.submit_query(alice, "INSERT INTO acl_t VALUES (3)").status ==
               orchestrator::LifecycleStatus::ok,
           "owner-update");
    expect(sim.submit_query(bob, "SELECT x FROM acl_t").status ==
               orchestrator::LifecycleStatus::ok,
           "grant-follows-hash-update");

    // Deny after revoke.
    storage::ContentHash h2 = sim.catalog().at("acl_t").manifest;
    sim.ledger().acl_revoke(alice.pk, bob.pk, h2,
                            sign_detached(alice.sk,
                                          ledger::Ledger::revoke_payload(alice.pk, bob.pk, h2)));
    expect(sim.submit_query(bob, "SELECT x FROM acl_t").status ==
               orchestrator::LifecycleStatus::access_denied,
           "deny-after-revoke");

    report(5, pass,
           "deny-before-grant, allow-after-grant, deny-after-revoke, "
           "grant-follows-hash-update" +
               detail.str());
}

// --- criteria 6 and 9: weight lifecycle and cache hygiene over 1000 rounds ---
void criteria_6_and_9() {
    orchestrator::SimulationConfig cfg;
    cfg.node_count = 6;
    cfg.genesis_weight_count = 4;
    cfg.quorum_size = 3;
    cfg.gossip_fanout = 2;
    cfg.rng_seed = "acceptance-weights";
    cfg.retry_limit = 32;
    orchestrator::Simulation sim(cfg);
    const auto& alice = sim.user("alice");

    bool setup_ok =
        sim.submit_query(alice, "CREATE TABLE w (k integer, v integer)").status ==
            orchestrator::LifecycleStatus::ok &&
        sim.submit_query(alice,
                         "INSERT INTO w VALUES (0, 3), (1, 1), (2, 4), (3, 1), (4, 5), (5, 9)")
                .status == orchestrator::LifecycleStatus::ok;

    int weight_violations = 0;
    int rotation_violations = 0;
    int cache_violations = 0;
    std::size_t ok_rounds = 0;
    // Role tracking for the rotation rule: master forbidden until the node
    // works again.
    std::set<std::array<std::uint8_t, 32>> barred_masters;

    const std::vector<std::string> queries = {
        "SELECT k FROM w WHERE v > 2",
        "SELECT SUM(v) FROM w",
        "SELECT k, v FROM w ORDER BY v DESC LIMIT 3",
        "SELECT COUNT(*) FROM w",
    };
    for (int i = 0; i < 1000; ++i) {
        orchestrator::QueryLifecycle lc =
            sim.submit_query(alice, queries[static_cast<std::size_t>(i) % queries.size()]);
        if (lc.status != orchestrator::LifecycleStatus::ok) {
            continue;
        }
        ++ok_rounds;
        const PublicKey master = *lc.election.master_pk;
        if (sim.ledger().node(master).weight != 0) {
            ++weight_violations;
        }
        for (const PublicKey& worker : lc.worker_pks) {
            if (sim.ledger().node(worker).weight != 1) {
                ++weight_violations;
            }
        }
        if (barred_masters.count(master.bytes)) {
            ++rotation_violations;
        }
        barred_masters.insert(master.bytes);
        for (const PublicKey& worker : lc.worker_pks) {
            barred_masters.erase(worker.bytes);
        }
        if (sim.global_cache_bytes() != 0) {
            ++cache_violations;
        }
    }

    bool pass6 = setup_ok && ok_rounds >= 900 && weight_violations == 0 &&
                 rotation_violations == 0;
    report(6, pass6,
           "1000-round simulation: " + std::to_string(ok_rounds) +
               " ok rounds, weight violations " + std::to_string(weight_violations) +
               ", consecutive-master violations " + std::to_string(rotation_violations));
    bool pass9 = setup_ok && cache_violations == 0;
    report(9, pass9,
           "global cache registry sum is 0 bytes after every ok lifecycle (violations " +
               std::to_string(cache_violations) + ")");
}

// --- criterion 7: gossip delivery ---
void criterion_7() {
    std::vector<vrf::KeyPair> keys;
    std::vector<PublicKey> pks;
    for (int i = 0; i < 50; ++i) {
        Bytes entropy(32, 0);
        entropy[0] = static_cast<std::uint8_t>(i);
        entropy[1] = 0x70;
        keys.push_back(vrf::keygen(entropy));
        pks.push_back(keys.back().pk);
    }

    int delivered_all = 0;
    int tamper_leaks = 0;
    int duplicate_forwards = 0;
    for (std::uint32_t s = 0; s < 100; ++s) {
        Bytes seed(32, 0);
        seed[0] = static_cast<std::uint8_t>(s);
        seed[1] = 0x71;
        gossip::NetworkTopology topo = gossip::build_connected_network(pks, 3, seed);
        gossip::GossipNetwork net(topo);

        gossip::DeliveryTrace trace =
            net.broadcast(keys[s % keys.size()].sk, Bytes{static_cast<std::uint8_t>(s)}, s);
        if (trace.delivered_count() == pks.size()) {
            ++delivered_all;
        }
        std::set<std::pair<std::uint32_t, std::array<std::uint8_t, 32>>> seen;
        for (const auto& [node, id] : trace.forwards) {
            if (!seen.insert({node, id.bytes}).second) {
                ++duplicate_forwards;
            }
        }

        gossip::GossipMessage tampered =
            gossip::make_message(keys[0].sk, Bytes{9, 9, static_cast<std::uint8_t>(s)}, s);
        tampered.payload[0] ^= 0xff;
        gossip::DeliveryTrace bad = net.inject(pks[(s + 7) % pks.size()], tampered);
        if (bad.delivered_count() != 0 || !bad.forwards.empty()) {
            ++tamper_leaks;
        }
    }
    bool pass = delivered_all == 100 && tamper_leaks == 0 && duplicate_forwards == 0;
    report(7, pass,
           "50 nodes fanout 3, 100 connected topologies: full delivery " +
               std::to_string(delivered_all) + "/100, tampered forwards " +
               std::to_string(tamper_leaks) + ", duplicate forwards " +
               std::to_string(duplicate_forwards));
}

// --- criterion 8: storage resilience ---
void criterion_8() {
    bool pass = true;
    std::ostringstream detail;

    // Exhaustive <= 2-subset failures of the 3 replica nodes.
    for (std::uint32_t mask = 0; mask < 8; ++mask) {
        int failures_in_mask = __builtin_popcount(mask);
        storage::BlockStore store(3, 3);
        Bytes block{1, 2, 3};
        storage::ContentHash h = store.put(block);
        for (std::uint32_t node = 0; node < 3; ++node) {
            if (mask & (1u << node)) {
                store.fail_node(node);
            }
        }
        try {
            Bytes got = store.get(h);
            if (failures_in_mask == 3) {
                pass = false;
                detail << " get succeeded after all replicas failed;";
            } else if (got != block) {
                pass = false;
                detail << " corrupted read;";
            }
        } catch (const UnavailableError&) {
            if (failures_in_mask < 3) {
                pass = false;
                detail << " unavailable with " << failures_in_mask << " failures;";
            }
        }
    }

    // 100 random tables: put/get and put_table/get_table identity.
    test_support::Rng rng(0xacce9708);
    for (int t = 0; t < 100; ++t) {
        storage::BlockStore store(4, 3);
        Table table = test_support::random_table(rng, "t" + std::to_string(t),
                                                 rng.next_below(300));
        storage::ContentHash mh = store.put_table(table, 32);
        if (store.get_table(mh) != table) {
            pass = false;
            detail << " table round trip " << t << " mismatch;";
        }
        Bytes block = rng.next_bytes(1 + rng.next_below(512));
        if (store.get(store.put(block)) != block) {
            pass = false;
            detail << " block round trip " << t << " mismatch;";
        }
    }
    report(8, pass,
           "replication 3: every <= 2-subset failure survives, all-3 unavailable; 100 "
           "random tables round-trip" +
               detail.str());
}

// --- criterion 10: scaling trend (makespan proxy) ---
void criterion_10() {
    orchestrator::SimulationConfig cfg;
    cfg.node_count = 5;
    cfg.genesis_weight_count = 3;
    cfg.quorum_size = 3;
    cfg.gossip_fanout = 2;
    cfg.rng_seed = "acceptance-makespan";
    cfg.makespan_worker_counts = {1, 2, 5, 10};
    cfg.workload.push_back({"alice", "CREATE TABLE scan_t (a integer, b integer)"});
    std::string insert = "INSERT INTO scan_t VALUES ";
    for (int i = 0; i < 600; ++i) {
        insert += (i ? ", (" : "(") + std::to_string(i) + ", " + std::to_string(i % 11) + ")";
    }
    cfg.workload.push_back({"alice", insert});
    cfg.workload.push_back({"alice", "SELECT SUM(b) FROM scan_t"});
    cfg.workload.push_back({"alice", "SELECT COUNT(*) FROM scan_t"});
    cfg.workload.push_back({"alice", "SELECT b, SUM(a) FROM scan_t GROUP BY b ORDER BY b ASC"});

    orchestrator::Simulation sim(cfg);
    auto report_json = nlohmann::json::parse(sim.run_and_report());
    std::map<std::uint64_t, std::uint64_t> makespan;
    for (const auto& entry : report_json["makespan_proxy"]) {
        makespan[entry["worker_count"]] = entry["total_max_partition_cost"];
    }
    bool pass = makespan[1] > makespan[2] && makespan[2] > makespan[5] &&
                makespan[5] > makespan[10];
    report(10, pass,
           "scan-aggregate makespan proxy strictly decreases over worker counts 1/2/5/10: " +
               std::to_string(makespan[1]) + " > " + std::to_string(makespan[2]) + " > " +
               std::to_string(makespan[5]) + " > " + std::to_string(makespan[10]));
}

// --- criterion 11: determinism ---
void criterion_11() {
    orchestrator::SimulationConfig cfg;
    cfg.node_count = 6;
    cfg.genesis_weight_count = 3;
    cfg.quorum_size = 3;
    cfg.gossip_fanout = 2;
    cfg.rng_seed = "acceptance-determinism";
    cfg.workload = {
        {"alice", "CREATE TABLE d (a integer, b decimal, c text, e date)"},
        {"alice", "INSERT INTO d VALUES (1, 1.5, 'x', '2024-01-01'), "
                  "(2, -2.25, 'y', '2024-06-15'), (3, 0.0, 'z', '2025-12-31')"},
        {"alice", "SELECT a, b FROM d WHERE a > 1 ORDER BY a DESC"},
        {"bob", "SELECT a FROM d"},
        {"alice", "SELECT COUNT(*), MIN(e), MAX(e) FROM d"},
    };
    orchestrator::Simulation a(cfg);
    std::string report_a = a.run_and_report();
    orchestrator::Simulation b(cfg);
    std::string report_b = b.run_and_report();
    bool pass = report_a == report_b && !report_a.empty();
    report(11, pass,
           "two simulate runs with identical config produce byte-identical report JSON (" +
               std::to_string(report_a.size()) + " bytes)");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_and_9();
    criterion_7();
    criterion_8();
    criterion_10();
    criterion_11();
    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
