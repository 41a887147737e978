#ifndef WEB3DB_VRF_HPP
#define WEB3DB_VRF_HPP

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"

namespace web3db::vrf {

inline constexpr int kHashLenBits = 256;

struct KeyPair {
    PublicKey pk;
    SecretKey sk;
};

// Unique-signature VRF output: proof is a deterministic signature over the
// input, hash is the digest of that proof. For a fixed (sk, input) both are
// deterministic, and the hash is uniquely determined by (pk, input).
struct VrfOutput {
    Digest256 hash;
    Signature proof;

    bool operator==(const VrfOutput&) const = default;
};

// Deterministic keypair from caller-supplied entropy; the same entropy
// always yields the same pair.
KeyPair keygen(ByteView entropy);

VrfOutput vrf_evaluate(const SecretKey& sk, ByteView input);

// True iff out.proof is a valid signature over input under pk and out.hash
// is the digest of out.proof. Never throws; malformed inputs yield false.
bool vrf_verify(const PublicKey& pk, ByteView input, const VrfOutput& out);

// The VRF hash as a fraction of 2^hashlen, in [0, 1).
double hash_ratio(const Digest256& hash);

}  // namespace web3db::vrf

#endif
