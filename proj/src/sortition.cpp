#include "web3db/sortition.hpp"

#include <cmath>
#include <limits>

namespace web3db::sortition {

namespace {

// C(w, k) via the multiplicative rule in 128-bit intermediates. Valid for
// w <= 64: C(64, 32) < 2^63.
std::uint64_t binomial_coefficient(std::uint64_t w, std::uint64_t k) {
    if (k > w - k) {
        k = w - k;
    }
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (w - k + i) / i;
    }
    return static_cast<std::uint64_t>(acc);
}

constexpr std::uint64_t kExactCoefficientLimit = 64;

}  // namespace

double binomial_pmf(std::uint64_t k, std::uint64_t w, double p) {
    if (k > w) {
        throw ArgumentError("binomial_pmf: k > w");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ArgumentError("binomial_pmf: p outside [0,1]");
    }
    if (w == 0) {
        return 1.0;  // empty product
    }
    if (p == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    if (p == 1.0) {
        return k == w ? 1.0 : 0.0;
    }
    if (w <= kExactCoefficientLimit) {
        double coeff = static_cast<double>(binomial_coefficient(w, k));
        return coeff * std::pow(p, static_cast<double>(k)) *
               std::pow(1.0 - p, static_cast<double>(w - k));
    }
    double log_pmf = std::lgamma(static_cast<double>(w) + 1.0) -
                     std::lgamma(static_cast<double>(k) + 1.0) -
                     std::lgamma(static_cast<double>(w - k) + 1.0) +
                     static_cast<double>(k) * std::log(p) +
                     static_cast<double>(w - k) * std::log1p(-p);
    return std::exp(log_pmf);
}

std::uint64_t select_j(double hash_ratio, std::uint64_t w, double p) {
    if (!(hash_ratio >= 0.0 && hash_ratio < 1.0)) {
        throw ArgumentError("select_j: hash_ratio outside [0,1)");
    }
    double cdf = 0.0;
    for (std::uint64_t j = 0; j < w; ++j) {
        cdf += binomial_pmf(j, w, p);
        if (hash_ratio < cdf) {
            return j;
        }
    }
    // Ratio fell at or beyond CDF(w-1); the remaining mass belongs to j = w.
    return w;
}

Bytes seed_input(const RoundSeed& seed) {
    Bytes input = seed.value;
    append_u64_be(input, seed.round);
    return input;
}

SortitionProof run_sortition(const SecretKey& sk, const RoundSeed& seed, std::uint64_t w,
                             std::uint64_t total_weight) {
    if (total_weight == 0) {
        throw ConfigError("sortition requires total weight >= 1");
    }
    if (w > total_weight) {
        throw ArgumentError("sortition: node weight exceeds total weight");
    }
    Bytes input = seed_input(seed);
    vrf::VrfOutput out = vrf::vrf_evaluate(sk, input);
    double p = static_cast<double>(w) / static_cast<double>(total_weight);
    SortitionProof sp;
    sp.node_pk = public_key_of(sk);
    sp.hash = out.hash;
    sp.proof = out.proof;
    sp.j = select_j(vrf::hash_ratio(out.hash), w, p);
    sp.round = seed.round;
    return sp;
}

std::uint64_t verify_sortition(const PublicKey& pk, const SortitionProof& sp,
                               const RoundSeed& seed, std::uint64_t w,
                               std::uint64_t total_weight) {
    if (total_weight == 0 || w > total_weight) {
        return 0;
    }
    Bytes input = seed_input(seed);
    if (!vrf::vrf_verify(pk, input, vrf::VrfOutput{sp.hash, sp.proof})) {
        return 0;
    }
    double p = static_cast<double>(w) / static_cast<double>(total_weight);
    return select_j(vrf::hash_ratio(sp.hash), w, p);
}

std::optional<Priority> priority_for(const Digest256& hash, std::uint64_t j) {
    if (j == 0) {
        return std::nullopt;
    }
    Priority best;
    for (std::uint64_t t = 0; t < j; ++t) {
        Bytes material(hash.bytes.begin(), hash.bytes.end());
        append_u64_be(material, t);
        Digest256 candidate = sha256(material);
        if (t == 0 || candidate < best.value) {
            best.value = candidate;
            best.sub_user_index = t;
        }
    }
    return best;
}

std::optional<Priority> priority(const SortitionProof& sp) {
    return priority_for(sp.hash, sp.j);
}

RoundSeed next_seed(const RoundSeed& prev, const SecretKey& master_sk) {
    Bytes input = prev.value;
    append_u64_be(input, prev.round + 1);
    vrf::VrfOutput out = vrf::vrf_evaluate(master_sk, input);
    RoundSeed next;
    next.round = prev.round + 1;
    next.value.assign(out.hash.bytes.begin(), out.hash.bytes.end());
    next.proof = out.proof;
    return next;
}

bool verify_next_seed(const PublicKey& master_pk, const RoundSeed& prev, const RoundSeed& next) {
    if (next.round != prev.round + 1 || next.value.size() != 32) {
        return false;
    }
    Bytes input = prev.value;
    append_u64_be(input, prev.round + 1);
    Digest256 hash;
    std::copy(next.value.begin(), next.value.end(), hash.bytes.begin());
    return vrf::vrf_verify(master_pk, input, vrf::VrfOutput{hash, next.proof});
}

RoundSeed retry_seed(const RoundSeed& seed, std::uint64_t retry) {
    Bytes material = seed.value;
    append_str(material, "retry");
    append_u64_be(material, retry);
    Digest256 derived = sha256(material);
    RoundSeed out;
    out.round = seed.round;
    out.value.assign(derived.bytes.begin(), derived.bytes.end());
    return out;
}

}  // namespace web3db::sortition
