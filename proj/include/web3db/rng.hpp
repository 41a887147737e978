#ifndef WEB3DB_RNG_HPP
#define WEB3DB_RNG_HPP

#include <cstdint>
#include <random>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"

namespace web3db {

// Deterministic RNG for simulations. mt19937_64 output is fully specified
// by the standard; bounded draws are done here because the standard
// distributions are not portable.
class DetRng {
public:
    explicit DetRng(ByteView seed) {
        Digest256 digest = sha256(seed);
        std::seed_seq seq(digest.bytes.begin(), digest.bytes.end());
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) {
            throw ArgumentError("DetRng::next_below: zero bound");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    Bytes next_bytes(std::size_t n) {
        Bytes out(n);
        for (auto& b : out) {
            b = static_cast<std::uint8_t>(next_below(256));
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace web3db

#endif
