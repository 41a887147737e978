#include "web3db/vrf.hpp"

#include <sodium.h>

#include <cmath>

namespace web3db::vrf {

KeyPair keygen(ByteView entropy) {
    if (entropy.size() != crypto_sign_SEEDBYTES) {
        throw ArgumentError("keygen entropy must be exactly 32 bytes, got " +
                            std::to_string(entropy.size()));
    }
    KeyPair kp;
    if (crypto_sign_seed_keypair(kp.pk.bytes.data(), kp.sk.bytes.data(), entropy.data()) != 0) {
        throw KeyError("keypair derivation failed");
    }
    return kp;
}

VrfOutput vrf_evaluate(const SecretKey& sk, ByteView input) {
    VrfOutput out;
    out.proof = sign_detached(sk, input);
    out.hash = sha256(out.proof);
    return out;
}

bool vrf_verify(const PublicKey& pk, ByteView input, const VrfOutput& out) {
    if (!verify_detached(pk, input, out.proof)) {
        return false;
    }
    return sha256(out.proof) == out.hash;
}

double hash_ratio(const Digest256& hash) {
    // The top 64 bits carry more precision than a double can hold, so the
    // truncation is exact at double resolution.
    std::uint64_t top = 0;
    for (int i = 0; i < 8; ++i) {
        top = (top << 8) | hash.bytes[static_cast<std::size_t>(i)];
    }
    return std::ldexp(static_cast<double>(top >> 11), -53);
}

}  // namespace web3db::vrf
