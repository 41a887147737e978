#include "web3db/orchestrator.hpp"

#include <algorithm>

#include "json.hpp"
#include "web3db/engine/plan.hpp"

namespace web3db::orchestrator {

using engine::CacheRegistry;
using engine::QueryResult;
using json = nlohmann::ordered_json;

std::string lifecycle_status_name(LifecycleStatus status) {
    switch (status) {
        case LifecycleStatus::ok: return "ok";
        case LifecycleStatus::access_denied: return "access_denied";
        case LifecycleStatus::no_master_retry_exhausted: return "no_master_retry_exhausted";
        case LifecycleStatus::incomplete: return "incomplete";
    }
    return "unknown";
}

void SimulationConfig::validate() const {
    if (node_count < 2) {
        throw ConfigError("node_count must be >= 2 (master plus at least one worker)");
    }
    if (genesis_weight_count < 1 || genesis_weight_count > node_count) {
        throw ConfigError("genesis_weight_count must be in [1, node_count]");
    }
    if (quorum_size < 1) {
        throw ConfigError("quorum_size must be >= 1");
    }
    if (gossip_fanout < 1 || gossip_fanout >= node_count) {
        throw ConfigError("gossip_fanout must be in [1, node_count)");
    }
    if (rows_per_block < 1) {
        throw ConfigError("rows_per_block must be >= 1");
    }
    if (replication_factor < 1 || replication_factor > node_count) {
        throw ConfigError("replication_factor must be in [1, node_count]");
    }
    if (retry_limit < 1) {
        throw ConfigError("retry_limit must be >= 1");
    }
    if (makespan_worker_counts.empty()) {
        throw ConfigError("makespan_worker_counts must not be empty");
    }
    for (std::uint32_t wc : makespan_worker_counts) {
        if (wc < 1) {
            throw ConfigError("makespan worker counts must be >= 1");
        }
    }
}

SimulationConfig SimulationConfig::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    SimulationConfig cfg;
    try {
        if (j.contains("node_count")) cfg.node_count = j["node_count"];
        if (j.contains("genesis_weight_count")) cfg.genesis_weight_count = j["genesis_weight_count"];
        if (j.contains("quorum_size")) cfg.quorum_size = j["quorum_size"];
        if (j.contains("gossip_fanout")) cfg.gossip_fanout = j["gossip_fanout"];
        if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"];
        if (j.contains("rows_per_block")) cfg.rows_per_block = j["rows_per_block"];
        if (j.contains("replication_factor")) cfg.replication_factor = j["replication_factor"];
        if (j.contains("retry_limit")) cfg.retry_limit = j["retry_limit"];
        if (j.contains("workers_per_query")) cfg.workers_per_query = j["workers_per_query"];
        if (j.contains("makespan_worker_counts")) {
            cfg.makespan_worker_counts.clear();
            for (const auto& v : j["makespan_worker_counts"]) {
                cfg.makespan_worker_counts.push_back(v);
            }
        }
        if (j.contains("workload")) {
            for (const auto& entry : j["workload"]) {
                cfg.workload.push_back(WorkloadEntry{entry["user"], entry["sql"]});
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string SimulationConfig::to_json() const {
    json j;
    j["node_count"] = node_count;
    j["genesis_weight_count"] = genesis_weight_count;
    j["quorum_size"] = quorum_size;
    j["gossip_fanout"] = gossip_fanout;
    j["rng_seed"] = rng_seed;
    j["rows_per_block"] = rows_per_block;
    j["replication_factor"] = replication_factor;
    j["retry_limit"] = retry_limit;
    j["workers_per_query"] = workers_per_query;
    j["makespan_worker_counts"] = makespan_worker_counts;
    j["workload"] = json::array();
    for (const auto& entry : workload) {
        j["workload"].push_back({{"user", entry.user}, {"sql", entry.sql}});
    }
    return j.dump(2);
}

Digest256 derive_session_key(const SecretKey& master_sk, std::uint64_t round) {
    Bytes input;
    append_str(input, "result");
    append_u64_be(input, round);
    return vrf::vrf_evaluate(master_sk, input).hash;
}

SignedResult encrypt_result(const SecretKey& master_sk, ByteView result_bytes,
                            std::uint64_t round) {
    SignedResult out;
    out.round = round;
    out.result_digest = sha256(result_bytes);
    out.master_signature =
        sign_detached(master_sk, ledger::Ledger::master_result_payload(out.result_digest, round));
    Bytes nonce_seed;
    append_str(nonce_seed, "result-nonce");
    append_u64_be(nonce_seed, round);
    append_bytes(nonce_seed, out.result_digest.bytes);
    out.encrypted_payload =
        secretbox_seal(derive_session_key(master_sk, round), result_bytes, nonce_seed);
    return out;
}

Bytes decrypt_result(const Digest256& session_key, const SignedResult& sealed) {
    Bytes plain = secretbox_open(session_key, sealed.encrypted_payload);
    if (sha256(plain) != sealed.result_digest) {
        throw TamperError("decrypted payload does not match the signed digest");
    }
    return plain;
}

SortitionStats run_sortition_stats(std::uint32_t node_count, std::uint64_t rounds,
                                   std::uint64_t weight, std::uint64_t total_weight_override,
                                   const std::string& seed_text) {
    if (node_count < 1 || rounds < 1) {
        throw ConfigError("sortition stats need at least one node and one round");
    }
    const std::uint64_t W =
        total_weight_override > 0 ? total_weight_override : weight * node_count;
    if (W == 0 || weight > W) {
        throw ConfigError("total weight must be >= 1 and >= per-node weight");
    }

    SortitionStats stats;
    stats.node_count = node_count;
    stats.rounds = rounds;
    stats.weight = weight;
    stats.total_weight = W;

    Bytes base(seed_text.begin(), seed_text.end());
    std::vector<vrf::KeyPair> keys;
    for (std::uint32_t i = 0; i < node_count; ++i) {
        Bytes material = base;
        append_str(material, "stats-node");
        append_u64_be(material, i);
        keys.push_back(vrf::keygen(sha256(material).bytes));
        stats.per_node.push_back(SortitionStats::PerNode{keys.back().pk, 0});
    }

    sortition::RoundSeed seed = sortition::RoundSeed::genesis(sha256(base).bytes);
    for (std::uint64_t r = 0; r < rounds; ++r) {
        seed.round = r;
        bool any = false;
        for (std::uint32_t i = 0; i < node_count; ++i) {
            sortition::SortitionProof sp =
                sortition::run_sortition(keys[i].sk, seed, weight, W);
            if (sp.j >= 1) {
                stats.per_node[i].selected += 1;
                any = true;
            }
        }
        if (any) {
            stats.rounds_with_candidate += 1;
        }
        // Digest-chained seed evolution: no master exists in stats mode.
        Bytes material = seed.value;
        append_str(material, "stats-advance");
        append_u64_be(material, r + 1);
        Digest256 next = sha256(material);
        seed.value.assign(next.bytes.begin(), next.bytes.end());
    }
    return stats;
}

std::string SortitionStats::to_json() const {
    json j;
    j["nodes"] = node_count;
    j["rounds"] = rounds;
    j["weight"] = weight;
    j["total_weight"] = total_weight;
    j["per_node"] = json::array();
    for (std::size_t i = 0; i < per_node.size(); ++i) {
        json n;
        n["pk"] = per_node[i].pk.hex();
        n["selected"] = per_node[i].selected;
        n["frequency"] = frequency(i);
        j["per_node"].push_back(n);
    }
    j["rounds_with_candidate"] = rounds_with_candidate;
    j["candidate_fraction"] = candidate_fraction();
    return j.dump(2) + "\n";
}

Simulation::Simulation(SimulationConfig config)
    : config_(std::move(config)),
      master_seed_bytes_(),
      ledger_(1, Bytes(32, 0)),  // re-initialized below
      store_(1, 1) {
    config_.validate();
    Bytes raw(config_.rng_seed.begin(), config_.rng_seed.end());
    Digest256 root = sha256(raw);
    master_seed_bytes_.assign(root.bytes.begin(), root.bytes.end());

    auto derive = [&](std::string_view tag, std::uint64_t index = 0) {
        Bytes material = master_seed_bytes_;
        append_str(material, tag);
        append_u64_be(material, index);
        return sha256(material);
    };

    ledger_ = ledger::Ledger(config_.quorum_size, derive("quorum-peers").bytes);
    store_ = storage::BlockStore(config_.node_count, config_.replication_factor);

    std::vector<PublicKey> pks;
    for (std::uint32_t i = 0; i < config_.node_count; ++i) {
        EngineNode node;
        node.keys = vrf::keygen(derive("engine-node", i).bytes);
        pks.push_back(node.keys.pk);
        nodes_.push_back(std::move(node));
        ledger_.register_node(pks.back(), i < config_.genesis_weight_count ? 1 : 0);
    }
    network_.emplace(
        gossip::build_connected_network(pks, config_.gossip_fanout, derive("topology").bytes));

    seed_ = sortition::RoundSeed::genesis(derive("genesis-seed").bytes);
}

const vrf::KeyPair& Simulation::user(const std::string& name) {
    auto it = users_.find(name);
    if (it != users_.end()) {
        return it->second;
    }
    Bytes material = master_seed_bytes_;
    append_str(material, "user:");
    append_str(material, name);
    vrf::KeyPair keys = vrf::keygen(sha256(material).bytes);
    return users_.emplace(name, keys).first->second;
}

void Simulation::register_user(const vrf::KeyPair& keys) {
    users_.emplace("pk:" + keys.pk.hex(), keys);
}

EngineNode& Simulation::node_of(const PublicKey& pk) {
    for (EngineNode& node : nodes_) {
        if (node.keys.pk == pk) {
            return node;
        }
    }
    throw NotFoundError("unknown engine node " + pk.short_hex());
}

std::uint64_t Simulation::global_cache_bytes() const {
    std::uint64_t total = 0;
    for (const EngineNode& node : nodes_) {
        total += node.cache.total_bytes();
    }
    return total;
}

void Simulation::note_partitions(const std::vector<engine::RowRange>& partitions) {
    if (partitions.empty()) {
        return;
    }
    std::size_t min_size = partitions.front().size();
    std::size_t max_size = min_size;
    for (const auto& range : partitions) {
        min_size = std::min(min_size, range.size());
        max_size = std::max(max_size, range.size());
    }
    partition_plans_ += 1;
    partition_max_skew_ = std::max(partition_max_skew_, max_size - min_size);
}

void Simulation::advance_seed_without_master() {
    Bytes material = seed_.value;
    append_str(material, "advance");
    append_u64_be(material, round_ + 1);
    Digest256 digest = sha256(material);
    seed_.round = round_ + 1;
    seed_.value.assign(digest.bytes.begin(), digest.bytes.end());
    seed_.proof.clear();
}

Simulation::ElectionRound Simulation::run_election_round(const sortition::RoundSeed& seed) {
    ElectionRound out;
    const std::uint64_t W = ledger_.total_weight();
    for (std::uint32_t retry = 0; retry < config_.retry_limit; ++retry) {
        out.retries = retry;
        if (W == 0) {
            break;  // genesis deadlock: nobody can win
        }
        sortition::RoundSeed attempt_seed =
            retry == 0 ? seed : sortition::retry_seed(seed, retry);
        std::vector<sortition::SortitionProof> proofs;
        for (EngineNode& node : nodes_) {
            const std::uint64_t w =
                static_cast<std::uint64_t>(ledger_.node(node.keys.pk).weight);
            node.sortition_attempts += 1;
            sortition::SortitionProof sp =
                sortition::run_sortition(node.keys.sk, attempt_seed, w, W);
            if (sp.j >= 1) {
                node.sortition_selected += 1;
                proofs.push_back(std::move(sp));
            }
        }
        ledger::MasterElection election = ledger_.elect_master(round_, attempt_seed, proofs);
        if (election.master_pk) {
            out.election = std::move(election);
            out.seed_used = attempt_seed;
            out.proofs = std::move(proofs);
            return out;
        }
    }
    out.retries = config_.retry_limit;
    out.seed_used = seed;
    return out;
}

void Simulation::worker_accept(EngineNode& worker, const ledger::ConsensusCertificate& cert,
                               std::uint32_t attempt) {
    ledger::ConsensusCertificate presented = cert;
    if (dispatch_interceptor) {
        dispatch_interceptor(presented, worker.keys.pk, attempt);
    }
    if (!ledger_.verify_consensus(presented)) {
        throw RefusalError("worker " + worker.keys.pk.short_hex() +
                           " refused: consensus proof invalid");
    }
    if (pending_force_purge_.count(worker.keys.pk.bytes)) {
        std::uint64_t freed = worker.cache.purge();
        pending_force_purge_.erase(worker.keys.pk.bytes);
        ledger_.note_audit("force_purge", worker.keys.pk.hex(), "-",
                           "bytes=" + std::to_string(freed));
    }
}

PublicKey Simulation::dispatch_fragment(const ledger::ConsensusCertificate& cert,
                                        const std::vector<PublicKey>& workers,
                                        std::size_t fragment,
                                        const std::function<void(EngineNode&)>& work) {
    // Initial target plus at most two re-dispatches.
    for (std::uint32_t attempt = 0; attempt <= 2; ++attempt) {
        const PublicKey& target = workers[(fragment + attempt) % workers.size()];
        EngineNode& node = node_of(target);
        try {
            worker_accept(node, cert, attempt);
        } catch (const RefusalError& e) {
            ledger_.note_audit("worker_refusal", target.hex(), "-",
                               "fragment=" + std::to_string(fragment));
            continue;
        }
        work(node);
        return target;
    }
    throw IncompleteError("fragment " + std::to_string(fragment) +
                          " refused by all dispatch attempts");
}

namespace {

void note_worker(std::vector<PublicKey>& served, const PublicKey& pk) {
    if (std::find(served.begin(), served.end(), pk) == served.end()) {
        served.push_back(pk);
    }
}

Digest256 partition_digest(std::uint64_t round, std::size_t fragment, std::string_view what) {
    Bytes material;
    append_str(material, what);
    append_u64_be(material, round);
    append_u64_be(material, fragment);
    return sha256(material);
}

}  // namespace

QueryResult Simulation::execute_create(QueryLifecycle& lc, const vrf::KeyPair& user_keys,
                                       const engine::CreateTableStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk) {
    (void)user_keys;
    for (std::size_t i = 0; i < stmt.columns.size(); ++i) {
        for (std::size_t j = i + 1; j < stmt.columns.size(); ++j) {
            if (stmt.columns[i].name == stmt.columns[j].name) {
                throw PlanError("duplicate column '" + stmt.columns[i].name + "'");
            }
        }
    }
    Table table;
    table.name = stmt.table;
    table.columns = stmt.columns;

    std::vector<PublicKey> workers;
    for (EngineNode& node : nodes_) {
        if (node.keys.pk != master_pk) {
            workers.push_back(node.keys.pk);
        }
    }
    if (config_.workers_per_query > 0 && workers.size() > config_.workers_per_query) {
        workers.resize(config_.workers_per_query);
    }
    Bytes schema_block = storage::encode_schema_block(table);
    Digest256 schema_digest = sha256(schema_block);
    // Every worker validates and holds the schema until the purge step.
    for (std::size_t f = 0; f < workers.size(); ++f) {
        PublicKey served = dispatch_fragment(cert, workers, f, [&](EngineNode& node) {
            node.cache.register_entry(schema_digest, schema_block.size());
        });
        note_worker(lc.worker_pks, served);
    }

    storage::ContentHash manifest = store_.put_table(table, config_.rows_per_block);
    lc.output_manifest = manifest;
    lc.probe_rows = 0;

    EngineNode& master = node_of(master_pk);
    master.cache.register_entry(schema_digest, schema_block.size());

    QueryResult result;
    result.columns = {{"status", ColumnType::text}};
    result.rows = {{std::string("created " + stmt.table)}};
    return result;
}

QueryResult Simulation::execute_insert(QueryLifecycle& lc, const vrf::KeyPair& user_keys,
                                       const engine::InsertStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk) {
    (void)user_keys;
    const CatalogEntry& entry = catalog_.at(stmt.table);
    lc.input_manifest = entry.manifest;
    Table table = store_.get_table(entry.manifest);

    EngineNode& master = node_of(master_pk);
    master.cache.register_entry(entry.manifest, engine::rows_byte_size(table.rows));

    for (const auto& literal_row : stmt.rows) {
        if (literal_row.size() != table.columns.size()) {
            throw PlanError("insert arity " + std::to_string(literal_row.size()) +
                            " != table arity " + std::to_string(table.columns.size()));
        }
        std::vector<Value> row;
        for (std::size_t i = 0; i < literal_row.size(); ++i) {
            const auto& lit = literal_row[i];
            const Column& col = table.columns[i];
            bool needs_quotes =
                col.type == ColumnType::text || col.type == ColumnType::date;
            if (lit.quoted != needs_quotes) {
                throw PlanError("literal '" + lit.text + "' does not match the " +
                                column_type_name(col.type) + " column '" + col.name + "'");
            }
            try {
                row.push_back(parse_value(col.type, lit.text));
            } catch (const ArgumentError& e) {
                throw PlanError(e.what());
            }
        }
        table.rows.push_back(std::move(row));
    }

    // Workers re-encode balanced partitions of the updated table.
    std::vector<PublicKey> workers;
    for (EngineNode& node : nodes_) {
        if (node.keys.pk != master_pk) {
            workers.push_back(node.keys.pk);
        }
    }
    if (config_.workers_per_query > 0 && workers.size() > config_.workers_per_query) {
        workers.resize(config_.workers_per_query);
    }
    auto partitions = engine::partition_rows(table.rows.size(),
                                             static_cast<std::uint32_t>(workers.size()));
    note_partitions(partitions);
    for (std::size_t f = 0; f < workers.size(); ++f) {
        std::uint64_t bytes = engine::rows_byte_size(table, partitions[f]);
        PublicKey served = dispatch_fragment(cert, workers, f, [&](EngineNode& node) {
            node.cache.register_entry(partition_digest(lc.round, f, "insert-partition"), bytes);
        });
        note_worker(lc.worker_pks, served);
    }
    lc.probe_rows = table.rows.size();

    storage::ContentHash new_manifest = store_.put_table(table, config_.rows_per_block);
    lc.output_manifest = new_manifest;

    QueryResult result;
    result.columns = {{"rows_inserted", ColumnType::integer}};
    result.rows = {{static_cast<std::int64_t>(stmt.rows.size())}};
    return result;
}

QueryResult Simulation::execute_select(QueryLifecycle& lc, const engine::SelectStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk) {
    const CatalogEntry& from_entry = catalog_.at(stmt.from_table);
    lc.input_manifest = from_entry.manifest;
    Table from_table = store_.get_table(from_entry.manifest);

    EngineNode& master = node_of(master_pk);
    master.cache.register_entry(from_entry.manifest, engine::rows_byte_size(from_table.rows));

    std::optional<Table> join_table;
    if (stmt.join) {
        const CatalogEntry& join_entry = catalog_.at(stmt.join->table);
        join_table = store_.get_table(join_entry.manifest);
        master.cache.register_entry(join_entry.manifest,
                                    engine::rows_byte_size(join_table->rows));
    }

    engine::TableInfo from_info{from_table.name, from_table.columns, from_table.rows.size()};
    std::optional<engine::TableInfo> join_info;
    if (join_table) {
        join_info =
            engine::TableInfo{join_table->name, join_table->columns, join_table->rows.size()};
    }

    std::vector<PublicKey> workers;
    for (EngineNode& node : nodes_) {
        if (node.keys.pk != master_pk) {
            workers.push_back(node.keys.pk);
        }
    }
    if (config_.workers_per_query > 0 && workers.size() > config_.workers_per_query) {
        workers.resize(config_.workers_per_query);
    }
    const std::uint32_t worker_count = static_cast<std::uint32_t>(workers.size());

    engine::ExecutionPlan plan = engine::plan(stmt, from_info, join_info, worker_count);
    note_partitions(plan.partitions);
    const Table& probe = plan.bound.probe_is_from ? from_table : *join_table;
    const Table* broadcast =
        plan.bound.has_join ? (plan.bound.probe_is_from ? &*join_table : &from_table) : nullptr;
    lc.probe_rows = probe.rows.size();
    lc.broadcast_rows = broadcast ? broadcast->rows.size() : 0;

    Digest256 broadcast_digest = partition_digest(lc.round, 0, "broadcast");

    std::vector<engine::PartialResult> partials;
    for (std::size_t f = 0; f < plan.partitions.size(); ++f) {
        PublicKey served = dispatch_fragment(cert, workers, f, [&](EngineNode& node) {
            partials.push_back(engine::worker_execute(
                plan.bound, probe, plan.partitions[f], broadcast,
                static_cast<std::uint32_t>(f), worker_count, node.cache,
                partition_digest(lc.round, f, "select-partition"), broadcast_digest));
        });
        note_worker(lc.worker_pks, served);
    }

    QueryResult result = engine::merge_partials(plan.bound, std::move(partials));

    Table result_table;
    result_table.name = "result";
    result_table.columns = result.columns;
    result_table.rows = result.rows;
    storage::ContentHash result_manifest = store_.put_table(result_table, config_.rows_per_block);
    lc.output_manifest = result_manifest;
    master.cache.register_entry(result_manifest, engine::rows_byte_size(result.rows));
    return result;
}

QueryLifecycle Simulation::submit_query(const vrf::KeyPair& user_keys, const std::string& sql) {
    QueryLifecycle lc;
    lc.round = round_;
    lc.user_pk = user_keys.pk;
    lc.sql = sql;
    lc.seed = seed_;
    ledger_.set_round(round_);
    register_user(user_keys);

    engine::QueryAst ast = engine::parse(sql);

    auto finish = [&](LifecycleStatus status, const std::string& detail) {
        lc.status = status;
        lc.detail = detail;
        advance_seed_without_master();
        ++round_;
        history_.push_back(lc);
        return lc;
    };

    // (1) Access control, deny-all on the first failure; a denied query
    // never reaches sortition.
    if (ast.kind == engine::StatementKind::create_table) {
        if (catalog_.count(ast.create->table)) {
            throw ConflictError("table '" + ast.create->table + "' already exists");
        }
    }
    for (const std::string& name : ast.referenced_tables()) {
        auto it = catalog_.find(name);
        if (it == catalog_.end()) {
            ledger_.note_audit("access_denied", user_keys.pk.hex(), "-", "table=" + name);
            return finish(LifecycleStatus::access_denied, "unknown table '" + name + "'");
        }
        if (!ledger_.acl_check(user_keys.pk, it->second.manifest)) {
            ledger_.note_audit("access_denied", user_keys.pk.hex(), it->second.manifest.hex(),
                               "table=" + name);
            return finish(LifecycleStatus::access_denied, "no grant on table '" + name + "'");
        }
    }

    // (2) Gossip the query across the engine nodes.
    Bytes payload;
    append_str(payload, "query");
    append_u64_be(payload, round_);
    append_bytes(payload, user_keys.pk.bytes);
    append_str(payload, sql);
    network_->clear_inboxes();
    EngineNode& entry_node = nodes_[round_ % nodes_.size()];
    network_->broadcast(entry_node.keys.sk, payload, round_);

    // (3, 4) Sortition under ledger weights, quorum election, retries.
    ElectionRound er = run_election_round(seed_);
    lc.retries = er.retries;
    lc.proofs = er.proofs;
    lc.election = er.election;
    if (!er.election.master_pk) {
        return finish(LifecycleStatus::no_master_retry_exhausted,
                      "no candidate after " + std::to_string(er.retries) + " attempts");
    }
    lc.seed = er.seed_used;
    const PublicKey master_pk = *er.election.master_pk;
    const ledger::ConsensusCertificate& cert = *er.election.certificate;
    EngineNode& master = node_of(master_pk);

    // (5-7) Master fetches data through storage and coordinates execution.
    QueryResult result;
    try {
        switch (ast.kind) {
            case engine::StatementKind::create_table:
                result = execute_create(lc, user_keys, *ast.create, cert, master_pk);
                break;
            case engine::StatementKind::insert:
                result = execute_insert(lc, user_keys, *ast.insert, cert, master_pk);
                break;
            case engine::StatementKind::select:
                result = execute_select(lc, *ast.select, cert, master_pk);
                break;
        }
    } catch (const IncompleteError& e) {
        // Caches of any involved node are still cleared.
        std::uint64_t freed = 0;
        for (EngineNode& node : nodes_) {
            freed += node.cache.purge();
        }
        lc.purged_bytes = freed;
        return finish(LifecycleStatus::incomplete, e.what());
    } catch (const Error&) {
        // Planning/type failures abort the round; leave no residue behind.
        for (EngineNode& node : nodes_) {
            node.cache.purge();
        }
        throw;
    }

    // (8) Master signs and session-encrypts the result.
    Bytes result_bytes = result.canonical_bytes();
    SignedResult sealed = encrypt_result(master.keys.sk, result_bytes, round_);
    lc.signed_result = sealed;

    // (9) Ledger peers verify the signature, then apply weight and hash
    // updates.
    if (!ledger_.verify_master_result(master_pk, sealed.result_digest, round_,
                                      sealed.master_signature)) {
        return finish(LifecycleStatus::incomplete, "master result signature rejected");
    }

    ledger_.record_worker_service(lc.worker_pks);
    for (const PublicKey& pk : lc.worker_pks) {
        journal_.push_back(JournalEntry{"worker", pk, {}, {}, {}, {}});
        node_of(pk).worker_rounds += 1;
    }
    ledger_.record_master_service(master_pk);
    journal_.push_back(JournalEntry{"master", master_pk, {}, {}, {}, {}});
    master.master_rounds += 1;

    switch (ast.kind) {
        case engine::StatementKind::create_table: {
            Digest256 manifest = *lc.output_manifest;
            Signature sig = sign_detached(
                user_keys.sk, ledger::Ledger::register_data_payload(user_keys.pk, manifest));
            ledger_.acl_register_data(user_keys.pk, manifest, sig);
            journal_.push_back(JournalEntry{"acl_register", user_keys.pk, {}, manifest, {}, sig});
            catalog_[ast.create->table] = CatalogEntry{user_keys.pk, manifest};
            break;
        }
        case engine::StatementKind::insert: {
            Digest256 old_hash = *lc.input_manifest;
            Digest256 new_hash = *lc.output_manifest;
            const CatalogEntry& entry = catalog_.at(ast.insert->table);
            // The hash update is signed by the data owner; the querying
            // user may be a grantee.
            const PublicKey owner = entry.owner;
            const vrf::KeyPair* owner_keys = nullptr;
            for (const auto& [name, keys] : users_) {
                if (keys.pk == owner) {
                    owner_keys = &keys;
                    break;
                }
            }
            if (owner_keys == nullptr) {
                return finish(LifecycleStatus::incomplete, "owner key unavailable for update");
            }
            Signature sig = sign_detached(
                owner_keys->sk, ledger::Ledger::update_hash_payload(owner, old_hash, new_hash));
            ledger_.acl_update_hash(owner, old_hash, new_hash, sig);
            journal_.push_back(JournalEntry{"acl_update", owner, {}, old_hash, new_hash, sig});
            catalog_[ast.insert->table].manifest = new_hash;
            break;
        }
        case engine::StatementKind::select: {
            // The user owns the stored result set.
            Digest256 manifest = *lc.output_manifest;
            Signature sig = sign_detached(
                user_keys.sk, ledger::Ledger::register_data_payload(user_keys.pk, manifest));
            ledger_.acl_register_data(user_keys.pk, manifest, sig);
            journal_.push_back(JournalEntry{"acl_register", user_keys.pk, {}, manifest, {}, sig});
            break;
        }
    }

    // (10) Purge caches: workers first, master last.
    std::vector<PublicKey> purge_order = lc.worker_pks;
    if (misbehaving_masters.count(master_pk.bytes)) {
        // Malicious master skips its own purge; the audit check catches it
        // and schedules a forced purge for its next worker term.
        lc.purged_bytes = purge_caches(purge_order).total_freed;
        ledger_.note_audit("purge_violation", master_pk.hex(), "-",
                           "bytes=" + std::to_string(master.cache.total_bytes()));
        pending_force_purge_.insert(master_pk.bytes);
    } else {
        purge_order.push_back(master_pk);
        lc.purged_bytes = purge_caches(purge_order).total_freed;
    }

    // (11) The user decrypts with the session key received over the
    // authorized return path.
    Bytes released = decrypt_result(derive_session_key(master.keys.sk, round_), sealed);
    if (released != result_bytes) {
        return finish(LifecycleStatus::incomplete, "released payload mismatch");
    }
    lc.result = result;

    // Seed evolution: the elected master derives the next round's seed.
    seed_ = sortition::next_seed(er.seed_used, master.keys.sk);
    ++round_;
    lc.status = LifecycleStatus::ok;
    history_.push_back(lc);
    return lc;
}

engine::PurgeReport Simulation::purge_caches(const std::vector<PublicKey>& node_ids) {
    engine::PurgeReport report;
    for (const PublicKey& pk : node_ids) {
        EngineNode& node = node_of(pk);
        std::uint64_t bytes = node.cache.purge();
        report.freed_per_node.emplace_back(pk.hex(), bytes);
        report.total_freed += bytes;
        ledger_.note_audit("purge", pk.hex(), "-", "bytes=" + std::to_string(bytes));
    }
    return report;
}

void Simulation::restore_catalog(const std::map<std::string, CatalogEntry>& catalog) {
    catalog_ = catalog;
}

void Simulation::restore_journal(const std::vector<JournalEntry>& journal) {
    for (const JournalEntry& entry : journal) {
        if (entry.op == "worker") {
            ledger_.record_worker_service({entry.a});
        } else if (entry.op == "master") {
            ledger_.record_master_service(entry.a);
        } else if (entry.op == "acl_register") {
            ledger_.acl_register_data(entry.a, entry.h1, entry.sig);
        } else if (entry.op == "acl_grant") {
            ledger_.acl_grant(entry.a, entry.b, entry.h1, entry.sig);
        } else if (entry.op == "acl_revoke") {
            ledger_.acl_revoke(entry.a, entry.b, entry.h1, entry.sig);
        } else if (entry.op == "acl_update") {
            ledger_.acl_update_hash(entry.a, entry.h1, entry.h2, entry.sig);
        } else {
            throw ConfigError("unknown journal op '" + entry.op + "'");
        }
        journal_.push_back(entry);
    }
}

void Simulation::restore_round(std::uint64_t round, const sortition::RoundSeed& seed) {
    round_ = round;
    seed_ = seed;
}

std::string Simulation::run_and_report() {
    for (std::size_t i = 0; i < config_.workload.size(); ++i) {
        const WorkloadEntry& entry = config_.workload[i];
        try {
            submit_query(user(entry.user), entry.sql);
        } catch (const Error& e) {
            throw ConfigError("workload entry " + std::to_string(i) + " ('" + entry.sql +
                              "') failed: " + e.what());
        }
    }

    json report;
    report["config"] = json::parse(config_.to_json());

    report["rounds"] = json::array();
    std::map<std::uint32_t, std::uint64_t> retry_histogram;
    std::map<std::uint32_t, std::uint64_t> makespan;
    std::size_t ok_rounds = 0;
    for (const QueryLifecycle& lc : history_) {
        json r;
        r["round"] = lc.round;
        r["user"] = lc.user_pk.hex();
        r["sql"] = lc.sql;
        r["status"] = lifecycle_status_name(lc.status);
        r["retries"] = lc.retries;
        r["master"] = lc.election.master_pk ? lc.election.master_pk->hex() : "";
        json workers = json::array();
        for (const PublicKey& pk : lc.worker_pks) {
            workers.push_back(pk.hex());
        }
        r["workers"] = workers;
        r["input_manifest"] = lc.input_manifest ? lc.input_manifest->hex() : "";
        r["output_manifest"] = lc.output_manifest ? lc.output_manifest->hex() : "";
        r["result_rows"] = lc.result ? lc.result->rows.size() : 0;
        r["probe_rows"] = lc.probe_rows;
        r["purged_bytes"] = lc.purged_bytes;
        r["detail"] = lc.detail;
        report["rounds"].push_back(r);

        if (lc.status != LifecycleStatus::access_denied) {
            retry_histogram[lc.retries] += 1;
        }
        if (lc.status == LifecycleStatus::ok) {
            ++ok_rounds;
            for (std::uint32_t wc : config_.makespan_worker_counts) {
                std::uint64_t max_partition = (lc.probe_rows + wc - 1) / wc;
                makespan[wc] += max_partition + lc.broadcast_rows;
            }
        }
    }

    report["node_stats"] = json::array();
    for (const EngineNode& node : nodes_) {
        json n;
        n["pk"] = node.keys.pk.hex();
        n["weight"] = ledger_.node(node.keys.pk).weight;
        n["master_rounds"] = node.master_rounds;
        n["worker_rounds"] = node.worker_rounds;
        n["sortition_attempts"] = node.sortition_attempts;
        n["sortition_selected"] = node.sortition_selected;
        report["node_stats"].push_back(n);
    }

    report["selection_frequency"] = json::array();
    for (const EngineNode& node : nodes_) {
        json f;
        f["pk"] = node.keys.pk.hex();
        f["attempts"] = node.sortition_attempts;
        f["selected"] = node.sortition_selected;
        f["frequency"] = node.sortition_attempts == 0
                             ? 0.0
                             : static_cast<double>(node.sortition_selected) /
                                   static_cast<double>(node.sortition_attempts);
        report["selection_frequency"].push_back(f);
    }

    report["retry_histogram"] = json::object();
    for (const auto& [retries, count] : retry_histogram) {
        report["retry_histogram"][std::to_string(retries)] = count;
    }

    report["partition_balance"] = {{"plans", partition_plans_},
                                   {"max_skew", partition_max_skew_}};

    report["makespan_proxy"] = json::array();
    for (std::uint32_t wc : config_.makespan_worker_counts) {
        json m;
        m["worker_count"] = wc;
        m["total_max_partition_cost"] = makespan.count(wc) ? makespan[wc] : 0;
        report["makespan_proxy"].push_back(m);
    }

    report["ok_rounds"] = ok_rounds;
    report["total_rounds"] = history_.size();
    report["cache_total_bytes"] = global_cache_bytes();
    return report.dump(2) + "\n";
}

}  // namespace web3db::orchestrator
