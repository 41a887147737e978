#ifndef WEB3DB_LEDGER_HPP
#define WEB3DB_LEDGER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"
#include "web3db/sortition.hpp"

namespace web3db::ledger {

struct NodeRecord {
    PublicKey pk;
    int weight = 0;  // always 0 or 1
    bool served_as_worker = false;
};

struct AclEntry {
    PublicKey owner_pk;
    std::set<Digest256> owned;
    std::map<PublicKey, std::set<Digest256>> granted_to;
};

struct CandidateSummary {
    PublicKey pk;
    std::uint64_t j = 0;  // recomputed by the quorum, not the claimed value
    sortition::Priority priority;
};

// Proof of consensus handed to the master and re-checked by every worker
// before it accepts work.
struct ConsensusCertificate {
    std::uint64_t round = 0;
    PublicKey master_pk;
    Digest256 winning_priority;
    std::vector<std::pair<std::uint32_t, Signature>> peer_signatures;
};

struct MasterElection {
    std::uint64_t round = 0;
    std::optional<PublicKey> master_pk;
    std::optional<sortition::Priority> winning_priority;
    std::vector<CandidateSummary> valid_candidates;  // sorted by (priority, pk)
    std::uint32_t quorum_votes = 0;
    std::optional<ConsensusCertificate> certificate;
};

struct AuditRecord {
    std::uint64_t round = 0;
    std::string op;
    std::string pk;
    std::string hash;
    std::string detail;
};

// The access-control and node-weight state machine. All mutations run on
// the caller's (single) thread; reads are const.
class Ledger {
public:
    Ledger(std::uint32_t quorum_size, ByteView peer_key_seed);

    // --- node weight log ---
    const NodeRecord& register_node(const PublicKey& pk, int genesis_weight);
    std::uint64_t total_weight() const;
    const NodeRecord& node(const PublicKey& pk) const;
    bool has_node(const PublicKey& pk) const;
    std::vector<NodeRecord> nodes() const;  // registration order

    void record_worker_service(const std::vector<PublicKey>& pks);
    void record_master_service(const PublicKey& master_pk);

    // --- ACL ---
    // Canonical signing payloads; callers sign these with their secret key.
    static Bytes register_data_payload(const PublicKey& owner, const Digest256& hash);
    static Bytes grant_payload(const PublicKey& owner, const PublicKey& grantee,
                               const Digest256& hash);
    static Bytes revoke_payload(const PublicKey& owner, const PublicKey& grantee,
                                const Digest256& hash);
    static Bytes update_hash_payload(const PublicKey& owner, const Digest256& old_hash,
                                     const Digest256& new_hash);

    const AclEntry& acl_register_data(const PublicKey& owner, const Digest256& hash,
                                      const Signature& sig);
    const AclEntry& acl_grant(const PublicKey& owner, const PublicKey& grantee,
                              const Digest256& hash, const Signature& sig);
    const AclEntry& acl_revoke(const PublicKey& owner, const PublicKey& grantee,
                               const Digest256& hash, const Signature& sig);
    const AclEntry& acl_update_hash(const PublicKey& owner, const Digest256& old_hash,
                                    const Digest256& new_hash, const Signature& sig);
    bool acl_check(const PublicKey& pk, const Digest256& hash) const;
    const AclEntry* acl_entry(const PublicKey& owner) const;

    // --- election ---
    // Each of the F simulated quorum peers independently re-verifies every
    // proof against ledger weights, recomputes priorities, and votes for
    // the minimal one. Agreement needs ceil(2F/3) votes.
    MasterElection elect_master(std::uint64_t round, const sortition::RoundSeed& seed,
                                const std::vector<sortition::SortitionProof>& proofs);
    bool verify_consensus(const ConsensusCertificate& cert) const;
    std::vector<PublicKey> quorum_peer_pks() const;
    std::uint32_t quorum_size() const { return quorum_size_; }
    std::uint32_t quorum_threshold() const { return (2 * quorum_size_ + 2) / 3; }

    // --- master result attestation ---
    static Bytes master_result_payload(const Digest256& result_digest, std::uint64_t round);
    bool verify_master_result(const PublicKey& master_pk, const Digest256& result_digest,
                              std::uint64_t round, const Signature& sig);

    // --- audit ---
    void set_round(std::uint64_t round) { current_round_ = round; }
    void note_audit(const std::string& op, const std::string& pk, const std::string& hash,
                    const std::string& detail);
    const std::vector<AuditRecord>& audit_log() const { return audit_; }
    std::string export_audit_log() const;  // round, op, pk, hash, detail per line

private:
    AclEntry& entry_for(const PublicKey& owner);
    void audit(const std::string& op, const std::string& pk, const std::string& hash,
               const std::string& detail);
    static Digest256 consensus_payload(std::uint64_t round, const PublicKey& master,
                                       const Digest256& winning_priority);

    std::uint32_t quorum_size_;
    std::vector<vrf::KeyPair> quorum_peers_;
    std::vector<PublicKey> node_order_;
    std::map<PublicKey, NodeRecord> nodes_;
    std::map<PublicKey, AclEntry> acl_;
    std::map<std::uint64_t, PublicKey> elected_;  // round -> master
    std::vector<AuditRecord> audit_;
    std::uint64_t current_round_ = 0;
};

}  // namespace web3db::ledger

#endif
