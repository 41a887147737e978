#ifndef WEB3DB_SORTITION_HPP
#define WEB3DB_SORTITION_HPP

#include <cstdint>
#include <optional>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"
#include "web3db/vrf.hpp"

namespace web3db::sortition {

// Seed for one round of selection. Round 0 is the configured genesis seed
// and carries no proof; later seeds carry the VRF proof of the master that
// produced them.
struct RoundSeed {
    std::uint64_t round = 0;
    Bytes value;
    Signature proof;

    bool operator==(const RoundSeed&) const = default;

    static RoundSeed genesis(ByteView value) {
        return RoundSeed{0, Bytes(value.begin(), value.end()), {}};
    }
};

struct SortitionProof {
    PublicKey node_pk;
    Digest256 hash;
    Signature proof;
    std::uint64_t j = 0;  // selected sub-user count; 0 means not selected
    std::uint64_t round = 0;

    bool operator==(const SortitionProof&) const = default;
};

// Total order over selected candidates; lower value wins.
struct Priority {
    Digest256 value;
    std::uint64_t sub_user_index = 0;

    auto operator<=>(const Priority&) const = default;
};

// B(k; w, p) = C(w,k) p^k (1-p)^(w-k). Exact integer binomial coefficients
// up to w = 64 (the largest w where C(w, w/2) fits 64 bits); log-space via
// lgamma beyond that.
double binomial_pmf(std::uint64_t k, std::uint64_t w, double p);

// The unique j with CDF(j-1) <= ratio < CDF(j), CDF(j) = sum_{k<=j} B(k;w,p).
// For uniform ratio this selects j = k with probability exactly B(k;w,p).
std::uint64_t select_j(double hash_ratio, std::uint64_t w, double p);

// The VRF input for a round: seed value followed by the fixed-width round
// counter. The query text is deliberately not mixed in.
Bytes seed_input(const RoundSeed& seed);

SortitionProof run_sortition(const SecretKey& sk, const RoundSeed& seed, std::uint64_t w,
                             std::uint64_t total_weight);

// Returns 0 on any VRF failure, otherwise the j recomputed from the proof's
// hash under (w, total_weight). Never throws.
std::uint64_t verify_sortition(const PublicKey& pk, const SortitionProof& sp,
                               const RoundSeed& seed, std::uint64_t w,
                               std::uint64_t total_weight);

// Minimum over sub-user indices t in [0, j) of digest(hash || t). nullopt
// when j = 0.
std::optional<Priority> priority(const SortitionProof& sp);
std::optional<Priority> priority_for(const Digest256& hash, std::uint64_t j);

// Seed evolution: the round-r master derives the round r+1 seed via its VRF.
RoundSeed next_seed(const RoundSeed& prev, const SecretKey& master_sk);
bool verify_next_seed(const PublicKey& master_pk, const RoundSeed& prev, const RoundSeed& next);

// Deterministic fallback seed for re-running an empty election within the
// same round.
RoundSeed retry_seed(const RoundSeed& seed, std::uint64_t retry);

}  // namespace web3db::sortition

#endif
