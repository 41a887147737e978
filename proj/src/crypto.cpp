#include "web3db/crypto.hpp"

#include <sodium.h>

#include <mutex>

namespace web3db {

namespace {

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) {
            throw Error("libsodium initialization failed");
        }
    });
}

}  // namespace

std::string to_hex(ByteView data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) {
        throw ArgumentError("hex string has odd length");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ArgumentError("invalid hex digit");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

Digest256 Digest256::from_hex_str(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) {
        throw ArgumentError("digest hex must decode to 32 bytes");
    }
    Digest256 d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
}

PublicKey PublicKey::from_hex_str(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) {
        throw ArgumentError("public key hex must decode to 32 bytes");
    }
    PublicKey pk;
    std::copy(raw.begin(), raw.end(), pk.bytes.begin());
    return pk;
}

SecretKey SecretKey::from_hex_str(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 64) {
        throw ArgumentError("secret key hex must decode to 64 bytes");
    }
    SecretKey sk;
    std::copy(raw.begin(), raw.end(), sk.bytes.begin());
    return sk;
}

Digest256 sha256(ByteView data) {
    ensure_sodium();
    Digest256 out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Signature sign_detached(const SecretKey& sk, ByteView message) {
    ensure_sodium();
    Signature sig(crypto_sign_BYTES);
    unsigned long long len = 0;
    if (crypto_sign_detached(sig.data(), &len, message.data(), message.size(), sk.bytes.data()) != 0) {
        throw KeyError("signing failed");
    }
    sig.resize(len);
    return sig;
}

bool verify_detached(const PublicKey& pk, ByteView message, ByteView signature) {
    ensure_sodium();
    if (signature.size() != crypto_sign_BYTES) {
        return false;
    }
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       pk.bytes.data()) == 0;
}

PublicKey public_key_of(const SecretKey& sk) {
    ensure_sodium();
    PublicKey pk;
    if (crypto_sign_ed25519_sk_to_pk(pk.bytes.data(), sk.bytes.data()) != 0) {
        throw KeyError("cannot derive public key from secret key");
    }
    return pk;
}

SealedBox secretbox_seal(const Digest256& key, ByteView plaintext, ByteView nonce_seed) {
    ensure_sodium();
    static_assert(crypto_secretbox_KEYBYTES == 32);
    Bytes seed_material(nonce_seed.begin(), nonce_seed.end());
    Digest256 nonce_digest = sha256(seed_material);
    SealedBox box;
    box.nonce.assign(nonce_digest.bytes.begin(), nonce_digest.bytes.begin() + crypto_secretbox_NONCEBYTES);
    box.ciphertext.resize(plaintext.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(box.ciphertext.data(), plaintext.data(), plaintext.size(),
                          box.nonce.data(), key.bytes.data());
    return box;
}

Bytes secretbox_open(const Digest256& key, const SealedBox& box) {
    ensure_sodium();
    if (box.nonce.size() != crypto_secretbox_NONCEBYTES ||
        box.ciphertext.size() < crypto_secretbox_MACBYTES) {
        throw TamperError("malformed sealed box");
    }
    Bytes plain(box.ciphertext.size() - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(plain.data(), box.ciphertext.data(), box.ciphertext.size(),
                                   box.nonce.data(), key.bytes.data()) != 0) {
        throw TamperError("authenticated decryption failed");
    }
    return plain;
}

}  // namespace web3db
