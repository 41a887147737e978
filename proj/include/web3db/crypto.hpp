#ifndef WEB3DB_CRYPTO_HPP
#define WEB3DB_CRYPTO_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "web3db/common.hpp"

namespace web3db {

// All digests in the system (VRF hashes, content addresses, message ids,
// priority values) use the same 256-bit primitive.
struct Digest256 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest256&) const = default;

    std::string hex() const { return to_hex(bytes); }
    static Digest256 from_hex_str(const std::string& hex);
};

struct PublicKey {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const PublicKey&) const = default;

    std::string hex() const { return to_hex(bytes); }
    std::string short_hex() const { return to_hex(bytes).substr(0, 12); }
    static PublicKey from_hex_str(const std::string& hex);
};

struct SecretKey {
    std::array<std::uint8_t, 64> bytes{};

    auto operator<=>(const SecretKey&) const = default;

    std::string hex() const { return to_hex(bytes); }
    static SecretKey from_hex_str(const std::string& hex);
};

using Signature = Bytes;  // 64-byte detached Ed25519 signature

Digest256 sha256(ByteView data);

// Detached deterministic signature under sk. Ed25519 signing is
// deterministic, which the VRF construction relies on.
Signature sign_detached(const SecretKey& sk, ByteView message);
bool verify_detached(const PublicKey& pk, ByteView message, ByteView signature);

PublicKey public_key_of(const SecretKey& sk);

// Authenticated symmetric encryption (XSalsa20-Poly1305) used for the
// session-encrypted result payload. The nonce is carried in the box.
struct SealedBox {
    Bytes nonce;
    Bytes ciphertext;
};

SealedBox secretbox_seal(const Digest256& key, ByteView plaintext, ByteView nonce_seed);
Bytes secretbox_open(const Digest256& key, const SealedBox& box);  // throws TamperError

}  // namespace web3db

#endif
