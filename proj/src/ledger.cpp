#include "web3db/ledger.hpp"

#include <algorithm>
#include <sstream>

namespace web3db::ledger {

Ledger::Ledger(std::uint32_t quorum_size, ByteView peer_key_seed) : quorum_size_(quorum_size) {
    if (quorum_size_ < 1) {
        throw ConfigError("quorum size must be >= 1");
    }
    for (std::uint32_t i = 0; i < quorum_size_; ++i) {
        Bytes material(peer_key_seed.begin(), peer_key_seed.end());
        append_str(material, "quorum-peer");
        append_u64_be(material, i);
        Digest256 entropy = sha256(material);
        quorum_peers_.push_back(vrf::keygen(entropy.bytes));
    }
}

const NodeRecord& Ledger::register_node(const PublicKey& pk, int genesis_weight) {
    if (genesis_weight != 0 && genesis_weight != 1) {
        throw ArgumentError("genesis weight must be 0 or 1");
    }
    auto [it, inserted] = nodes_.try_emplace(pk);
    if (!inserted) {
        throw ConflictError("node already registered: " + pk.short_hex());
    }
    it->second.pk = pk;
    it->second.weight = genesis_weight;
    // Genesis weight-1 nodes are treated as having already served.
    it->second.served_as_worker = genesis_weight == 1;
    node_order_.push_back(pk);
    audit("register_node", pk.hex(), "-", "weight=" + std::to_string(genesis_weight));
    return it->second;
}

std::uint64_t Ledger::total_weight() const {
    std::uint64_t w = 0;
    for (const auto& [pk, rec] : nodes_) {
        w += static_cast<std::uint64_t>(rec.weight);
    }
    return w;
}

const NodeRecord& Ledger::node(const PublicKey& pk) const {
    auto it = nodes_.find(pk);
    if (it == nodes_.end()) {
        throw NotFoundError("unknown node: " + pk.short_hex());
    }
    return it->second;
}

bool Ledger::has_node(const PublicKey& pk) const {
    return nodes_.count(pk) > 0;
}

std::vector<NodeRecord> Ledger::nodes() const {
    std::vector<NodeRecord> out;
    out.reserve(node_order_.size());
    for (const PublicKey& pk : node_order_) {
        out.push_back(nodes_.at(pk));
    }
    return out;
}

void Ledger::record_worker_service(const std::vector<PublicKey>& pks) {
    for (const PublicKey& pk : pks) {
        if (!nodes_.count(pk)) {
            throw NotFoundError("record_worker_service: unknown node " + pk.short_hex());
        }
    }
    for (const PublicKey& pk : pks) {
        NodeRecord& rec = nodes_.at(pk);
        rec.weight = 1;
        rec.served_as_worker = true;
        audit("weight_worker", pk.hex(), "-", "weight=1");
    }
}

void Ledger::record_master_service(const PublicKey& master_pk) {
    auto it = nodes_.find(master_pk);
    if (it == nodes_.end()) {
        throw NotFoundError("record_master_service: unknown node " + master_pk.short_hex());
    }
    it->second.weight = 0;
    audit("weight_master", master_pk.hex(), "-", "weight=0");
}

namespace {

Bytes tagged_payload(std::string_view tag, std::initializer_list<ByteView> parts) {
    Bytes out;
    append_str(out, tag);
    for (ByteView part : parts) {
        append_u32_be(out, static_cast<std::uint32_t>(part.size()));
        append_bytes(out, part);
    }
    return out;
}

}  // namespace

Bytes Ledger::register_data_payload(const PublicKey& owner, const Digest256& hash) {
    return tagged_payload("acl-register", {owner.bytes, hash.bytes});
}

Bytes Ledger::grant_payload(const PublicKey& owner, const PublicKey& grantee,
                            const Digest256& hash) {
    return tagged_payload("acl-grant", {owner.bytes, grantee.bytes, hash.bytes});
}

Bytes Ledger::revoke_payload(const PublicKey& owner, const PublicKey& grantee,
                             const Digest256& hash) {
    return tagged_payload("acl-revoke", {owner.bytes, grantee.bytes, hash.bytes});
}

Bytes Ledger::update_hash_payload(const PublicKey& owner, const Digest256& old_hash,
                                  const Digest256& new_hash) {
    return tagged_payload("acl-update", {owner.bytes, old_hash.bytes, new_hash.bytes});
}

AclEntry& Ledger::entry_for(const PublicKey& owner) {
    auto [it, inserted] = acl_.try_emplace(owner);
    if (inserted) {
        it->second.owner_pk = owner;
    }
    return it->second;
}

const AclEntry& Ledger::acl_register_data(const PublicKey& owner, const Digest256& hash,
                                          const Signature& sig) {
    if (!verify_detached(owner, register_data_payload(owner, hash), sig)) {
        throw AuthError("acl_register_data: bad signature");
    }
    AclEntry& entry = entry_for(owner);
    entry.owned.insert(hash);
    audit("acl_register", owner.hex(), hash.hex(), "-");
    return entry;
}

const AclEntry& Ledger::acl_grant(const PublicKey& owner, const PublicKey& grantee,
                                  const Digest256& hash, const Signature& sig) {
    if (!verify_detached(owner, grant_payload(owner, grantee, hash), sig)) {
        throw AuthError("acl_grant: bad signature");
    }
    AclEntry& entry = entry_for(owner);
    if (!entry.owned.count(hash)) {
        throw OwnershipError("acl_grant: hash not owned by grantor");
    }
    entry.granted_to[grantee].insert(hash);
    audit("acl_grant", owner.hex(), hash.hex(), "grantee=" + grantee.hex());
    return entry;
}

const AclEntry& Ledger::acl_revoke(const PublicKey& owner, const PublicKey& grantee,
                                   const Digest256& hash, const Signature& sig) {
    if (!verify_detached(owner, revoke_payload(owner, grantee, hash), sig)) {
        throw AuthError("acl_revoke: bad signature");
    }
    AclEntry& entry = entry_for(owner);
    if (!entry.owned.count(hash)) {
        throw OwnershipError("acl_revoke: hash not owned by grantor");
    }
    auto it = entry.granted_to.find(grantee);
    if (it != entry.granted_to.end()) {
        it->second.erase(hash);
        if (it->second.empty()) {
            entry.granted_to.erase(it);
        }
    }
    audit("acl_revoke", owner.hex(), hash.hex(), "grantee=" + grantee.hex());
    return entry;
}

const AclEntry& Ledger::acl_update_hash(const PublicKey& owner, const Digest256& old_hash,
                                        const Digest256& new_hash, const Signature& sig) {
    if (!verify_detached(owner, update_hash_payload(owner, old_hash, new_hash), sig)) {
        throw AuthError("acl_update_hash: bad signature");
    }
    AclEntry& entry = entry_for(owner);
    if (!entry.owned.count(old_hash)) {
        throw NotFoundError("acl_update_hash: unknown hash");
    }
    entry.owned.erase(old_hash);
    entry.owned.insert(new_hash);
    // Grants follow the logical table across versions.
    for (auto& [grantee, hashes] : entry.granted_to) {
        if (hashes.erase(old_hash) > 0) {
            hashes.insert(new_hash);
        }
    }
    audit("acl_update_hash", owner.hex(), new_hash.hex(), "old=" + old_hash.hex());
    return entry;
}

bool Ledger::acl_check(const PublicKey& pk, const Digest256& hash) const {
    auto own = acl_.find(pk);
    if (own != acl_.end() && own->second.owned.count(hash)) {
        return true;
    }
    for (const auto& [owner, entry] : acl_) {
        auto it = entry.granted_to.find(pk);
        if (it != entry.granted_to.end() && it->second.count(hash)) {
            return true;
        }
    }
    return false;
}

const AclEntry* Ledger::acl_entry(const PublicKey& owner) const {
    auto it = acl_.find(owner);
    return it == acl_.end() ? nullptr : &it->second;
}

Digest256 Ledger::consensus_payload(std::uint64_t round, const PublicKey& master,
                                    const Digest256& winning_priority) {
    Bytes material;
    append_str(material, "consensus");
    append_u64_be(material, round);
    append_bytes(material, master.bytes);
    append_bytes(material, winning_priority.bytes);
    return sha256(material);
}

MasterElection Ledger::elect_master(std::uint64_t round, const sortition::RoundSeed& seed,
                                    const std::vector<sortition::SortitionProof>& proofs) {
    const std::uint64_t W = total_weight();

    // One proof per node: the VRF is deterministic, duplicates carry no
    // extra information.
    std::vector<sortition::SortitionProof> unique;
    std::set<PublicKey> seen;
    for (const auto& sp : proofs) {
        if (seen.insert(sp.node_pk).second) {
            unique.push_back(sp);
        }
    }

    // Every quorum peer runs the same verification independently; votes are
    // tallied rather than assumed identical.
    std::map<PublicKey, std::uint32_t> votes;
    std::vector<CandidateSummary> candidates;
    for (std::uint32_t peer = 0; peer < quorum_size_; ++peer) {
        std::optional<CandidateSummary> best;
        std::vector<CandidateSummary> peer_candidates;
        for (const auto& sp : unique) {
            auto node_it = nodes_.find(sp.node_pk);
            const std::uint64_t w =
                node_it == nodes_.end() ? 0 : static_cast<std::uint64_t>(node_it->second.weight);
            const std::uint64_t j =
                W == 0 ? 0 : sortition::verify_sortition(sp.node_pk, sp, seed, w, W);
            if (j == 0) {
                continue;
            }
            auto prio = sortition::priority_for(sp.hash, j);
            CandidateSummary summary{sp.node_pk, j, *prio};
            peer_candidates.push_back(summary);
            if (!best || summary.priority.value < best->priority.value ||
                (summary.priority.value == best->priority.value && summary.pk < best->pk)) {
                best = summary;
            }
        }
        if (best) {
            votes[best->pk] += 1;
        }
        if (peer == 0) {
            candidates = std::move(peer_candidates);
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.priority.value != b.priority.value) return a.priority.value < b.priority.value;
        return a.pk < b.pk;
    });

    MasterElection result;
    result.round = round;
    result.valid_candidates = candidates;

    std::optional<PublicKey> winner;
    std::uint32_t winner_votes = 0;
    for (const auto& [pk, count] : votes) {
        if (count > winner_votes || (count == winner_votes && winner && pk < *winner)) {
            winner = pk;
            winner_votes = count;
        }
    }

    if (winner && winner_votes >= quorum_threshold()) {
        result.master_pk = winner;
        result.quorum_votes = winner_votes;
        for (const auto& c : candidates) {
            if (c.pk == *winner) {
                result.winning_priority = c.priority;
                break;
            }
        }
        ConsensusCertificate cert;
        cert.round = round;
        cert.master_pk = *winner;
        cert.winning_priority = result.winning_priority->value;
        Digest256 payload = consensus_payload(round, *winner, cert.winning_priority);
        for (std::uint32_t i = 0; i < quorum_size_; ++i) {
            cert.peer_signatures.emplace_back(i, sign_detached(quorum_peers_[i].sk, payload.bytes));
        }
        result.certificate = cert;
        elected_[round] = *winner;
        audit("election", winner->hex(), "-",
              "candidates=" + std::to_string(candidates.size()) +
                  ";votes=" + std::to_string(winner_votes));
    } else {
        audit("election_empty", "-", "-", "candidates=" + std::to_string(candidates.size()));
    }
    return result;
}

bool Ledger::verify_consensus(const ConsensusCertificate& cert) const {
    Digest256 payload = consensus_payload(cert.round, cert.master_pk, cert.winning_priority);
    std::set<std::uint32_t> valid_peers;
    for (const auto& [index, sig] : cert.peer_signatures) {
        if (index >= quorum_peers_.size()) {
            continue;
        }
        if (verify_detached(quorum_peers_[index].pk, payload.bytes, sig)) {
            valid_peers.insert(index);
        }
    }
    return valid_peers.size() >= quorum_threshold();
}

std::vector<PublicKey> Ledger::quorum_peer_pks() const {
    std::vector<PublicKey> out;
    out.reserve(quorum_peers_.size());
    for (const auto& kp : quorum_peers_) {
        out.push_back(kp.pk);
    }
    return out;
}

Bytes Ledger::master_result_payload(const Digest256& result_digest, std::uint64_t round) {
    Bytes out;
    append_str(out, "master-result");
    append_bytes(out, result_digest.bytes);
    append_u64_be(out, round);
    return out;
}

bool Ledger::verify_master_result(const PublicKey& master_pk, const Digest256& result_digest,
                                  std::uint64_t round, const Signature& sig) {
    auto it = elected_.find(round);
    if (it == elected_.end() || it->second != master_pk) {
        return false;
    }
    if (!verify_detached(master_pk, master_result_payload(result_digest, round), sig)) {
        return false;
    }
    audit("verify_result", master_pk.hex(), result_digest.hex(), "round=" + std::to_string(round));
    return true;
}

void Ledger::audit(const std::string& op, const std::string& pk, const std::string& hash,
                   const std::string& detail) {
    audit_.push_back(AuditRecord{current_round_, op, pk, hash, detail});
}

void Ledger::note_audit(const std::string& op, const std::string& pk, const std::string& hash,
                        const std::string& detail) {
    audit(op, pk, hash, detail);
}

std::string Ledger::export_audit_log() const {
    std::ostringstream out;
    for (const AuditRecord& rec : audit_) {
        out << rec.round << ',' << rec.op << ',' << rec.pk << ',' << rec.hash << ',' << rec.detail
            << '\n';
    }
    return out.str();
}

}  // namespace web3db::ledger
