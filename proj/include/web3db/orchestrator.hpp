#ifndef WEB3DB_ORCHESTRATOR_HPP
#define WEB3DB_ORCHESTRATOR_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"
#include "web3db/engine/cache.hpp"
#include "web3db/engine/execute.hpp"
#include "web3db/engine/parser.hpp"
#include "web3db/gossip.hpp"
#include "web3db/ledger.hpp"
#include "web3db/sortition.hpp"
#include "web3db/storage.hpp"
#include "web3db/vrf.hpp"

namespace web3db::orchestrator {

struct WorkloadEntry {
    std::string user;
    std::string sql;

    bool operator==(const WorkloadEntry&) const = default;
};

// Standalone sortition statistics: N keypairs with fixed weights run R
// rounds over a digest-chained seed; no ledger churn.
struct SortitionStats {
    std::uint32_t node_count = 0;
    std::uint64_t rounds = 0;
    std::uint64_t weight = 1;
    std::uint64_t total_weight = 0;
    struct PerNode {
        PublicKey pk;
        std::uint64_t selected = 0;
    };
    std::vector<PerNode> per_node;
    std::uint64_t rounds_with_candidate = 0;

    double frequency(std::size_t node) const {
        return rounds == 0 ? 0.0
                           : static_cast<double>(per_node[node].selected) /
                                 static_cast<double>(rounds);
    }
    double candidate_fraction() const {
        return rounds == 0 ? 0.0
                           : static_cast<double>(rounds_with_candidate) /
                                 static_cast<double>(rounds);
    }
    std::string to_json() const;
};

SortitionStats run_sortition_stats(std::uint32_t node_count, std::uint64_t rounds,
                                   std::uint64_t weight, std::uint64_t total_weight_override,
                                   const std::string& seed_text);

struct SimulationConfig {
    std::uint32_t node_count = 8;
    std::uint32_t genesis_weight_count = 4;
    std::uint32_t quorum_size = 5;
    std::uint32_t gossip_fanout = 3;
    std::string rng_seed = "default-web3db-seed";
    std::uint32_t rows_per_block = 128;
    std::uint32_t replication_factor = 3;
    std::uint32_t retry_limit = 16;
    std::uint32_t workers_per_query = 0;  // 0: every non-master node
    std::vector<std::uint32_t> makespan_worker_counts = {1, 2, 5, 10};
    std::vector<WorkloadEntry> workload;

    void validate() const;
    static SimulationConfig from_json(const std::string& json_text);
    std::string to_json() const;
};

enum class LifecycleStatus { ok, access_denied, no_master_retry_exhausted, incomplete };

std::string lifecycle_status_name(LifecycleStatus status);

// Result payload as released by the master: digest signed for the ledger
// peers, payload encrypted under a session key only the master can derive.
struct SignedResult {
    Digest256 result_digest;
    std::uint64_t round = 0;
    Signature master_signature;
    SealedBox encrypted_payload;
};

Digest256 derive_session_key(const SecretKey& master_sk, std::uint64_t round);
SignedResult encrypt_result(const SecretKey& master_sk, ByteView result_bytes,
                            std::uint64_t round);
// Throws TamperError on MAC or digest mismatch.
Bytes decrypt_result(const Digest256& session_key, const SignedResult& sealed);

struct QueryLifecycle {
    std::uint64_t round = 0;
    PublicKey user_pk;
    std::string sql;
    sortition::RoundSeed seed;  // the seed that concluded the round
    std::uint32_t retries = 0;
    std::vector<sortition::SortitionProof> proofs;  // winning-candidate proofs
    ledger::MasterElection election;
    std::vector<PublicKey> worker_pks;
    std::optional<storage::ContentHash> input_manifest;
    std::optional<storage::ContentHash> output_manifest;
    std::optional<SignedResult> signed_result;
    std::optional<engine::QueryResult> result;
    LifecycleStatus status = LifecycleStatus::incomplete;
    std::string detail;
    std::size_t probe_rows = 0;      // rows partitioned across workers
    std::size_t broadcast_rows = 0;  // rows copied to every worker
    std::uint64_t purged_bytes = 0;
};

struct EngineNode {
    vrf::KeyPair keys;
    engine::CacheRegistry cache;
    std::uint64_t sortition_attempts = 0;
    std::uint64_t sortition_selected = 0;
    std::uint64_t master_rounds = 0;
    std::uint64_t worker_rounds = 0;
};

// Journal of signed ACL commands and weight events, sufficient to replay
// the ledger state through its normal verified interfaces.
struct JournalEntry {
    std::string op;  // acl_register | acl_grant | acl_revoke | acl_update | worker | master
    PublicKey a;
    PublicKey b;  // grantee when applicable
    Digest256 h1;
    Digest256 h2;  // new hash for updates
    Signature sig;
};

struct CatalogEntry {
    PublicKey owner;
    storage::ContentHash manifest;
};

class Simulation {
public:
    explicit Simulation(SimulationConfig config);

    // Deterministically derived, lazily registered simulation users.
    const vrf::KeyPair& user(const std::string& name);
    // Registers an externally supplied user key (CLI keyfiles).
    void register_user(const vrf::KeyPair& keys);

    QueryLifecycle submit_query(const vrf::KeyPair& user_keys, const std::string& sql);

    // Empties the listed nodes' cache registries in order (callers list the
    // master last). Purging an already-empty registry frees zero bytes.
    engine::PurgeReport purge_caches(const std::vector<PublicKey>& node_ids);

    // Sortition across all engine nodes under current ledger weights,
    // retrying with derived seeds until a master emerges or the retry
    // budget is exhausted.
    struct ElectionRound {
        ledger::MasterElection election;
        sortition::RoundSeed seed_used;
        std::uint32_t retries = 0;
        std::vector<sortition::SortitionProof> proofs;
    };
    ElectionRound run_election_round(const sortition::RoundSeed& seed);

    std::string run_and_report();  // executes the configured workload

    // --- accessors ---
    const SimulationConfig& config() const { return config_; }
    ledger::Ledger& ledger() { return ledger_; }
    storage::BlockStore& store() { return store_; }
    std::vector<EngineNode>& nodes() { return nodes_; }
    const std::map<std::string, CatalogEntry>& catalog() const { return catalog_; }
    const std::vector<QueryLifecycle>& history() const { return history_; }
    const std::vector<JournalEntry>& journal() const { return journal_; }
    const sortition::RoundSeed& current_seed() const { return seed_; }
    std::uint64_t next_round() const { return round_; }
    std::uint64_t global_cache_bytes() const;

    // --- persistence hooks (CLI `query` mode) ---
    void restore_catalog(const std::map<std::string, CatalogEntry>& catalog);
    void restore_journal(const std::vector<JournalEntry>& journal);  // replays
    void restore_round(std::uint64_t round, const sortition::RoundSeed& seed);

    // --- test hooks ---
    // Called per (worker pk, attempt) before dispatch; may tamper with the
    // certificate copy handed to that worker.
    std::function<void(ledger::ConsensusCertificate&, const PublicKey&, std::uint32_t)>
        dispatch_interceptor;
    // Masters that skip their own purge; the audit check flags them and
    // their next worker term force-purges.
    std::set<std::array<std::uint8_t, 32>> misbehaving_masters;

private:
    EngineNode& node_of(const PublicKey& pk);
    void advance_seed_without_master();
    void note_partitions(const std::vector<engine::RowRange>& partitions);
    engine::QueryResult execute_create(QueryLifecycle& lc, const vrf::KeyPair& user_keys,
                                       const engine::CreateTableStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk);
    engine::QueryResult execute_insert(QueryLifecycle& lc, const vrf::KeyPair& user_keys,
                                       const engine::InsertStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk);
    engine::QueryResult execute_select(QueryLifecycle& lc, const engine::SelectStatement& stmt,
                                       const ledger::ConsensusCertificate& cert,
                                       const PublicKey& master_pk);
    // Dispatch one fragment with refusal retries; returns the worker that
    // actually served.
    PublicKey dispatch_fragment(const ledger::ConsensusCertificate& cert,
                                const std::vector<PublicKey>& workers, std::size_t fragment,
                                const std::function<void(EngineNode&)>& work);
    void worker_accept(EngineNode& worker, const ledger::ConsensusCertificate& cert,
                       std::uint32_t attempt);

    SimulationConfig config_;
    Bytes master_seed_bytes_;
    ledger::Ledger ledger_;
    storage::BlockStore store_;
    std::vector<EngineNode> nodes_;
    std::optional<gossip::GossipNetwork> network_;
    std::map<std::string, vrf::KeyPair> users_;
    std::map<std::string, CatalogEntry> catalog_;  // table name -> owner+manifest
    sortition::RoundSeed seed_;
    std::uint64_t round_ = 0;
    std::vector<QueryLifecycle> history_;
    std::vector<JournalEntry> journal_;
    std::set<std::array<std::uint8_t, 32>> pending_force_purge_;
    std::uint64_t partition_plans_ = 0;
    std::size_t partition_max_skew_ = 0;
};

}  // namespace web3db::orchestrator

#endif
