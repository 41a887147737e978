#include <thread>
#include <set>
#include <string>

#include "doctest.h"
#include "support/stats.hpp"
#include "web3db/vrf.hpp"

using namespace web3db;
using namespace web3db::vrf;

namespace {

Bytes str_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

}  // namespace

TEST_CASE("keygen is deterministic and rejects bad entropy") {
    Bytes zero(32, 0);
    KeyPair a = keygen(zero);
    KeyPair b = keygen(zero);
    CHECK(a.pk == b.pk);
    CHECK(a.sk == b.sk);

    Bytes other(32, 1);
    CHECK(keygen(other).pk != a.pk);

    CHECK_THROWS_AS(keygen(Bytes(31, 0)), ArgumentError);
    CHECK_THROWS_AS(keygen(Bytes(33, 0)), ArgumentError);
    CHECK_THROWS_AS(keygen(Bytes{}), ArgumentError);
}

TEST_CASE("10^4 random entropies yield 10^4 distinct public keys") {
    test_support::Rng rng(0x5eed0001);
    std::set<std::array<std::uint8_t, 32>> pks;
    for (int i = 0; i < 10000; ++i) {
        pks.insert(keygen(rng.next_bytes(32)).pk.bytes);
    }
    CHECK(pks.size() == 10000);
}

TEST_CASE("vrf_evaluate is deterministic") {
    KeyPair kp = keygen(Bytes(32, 7));
    VrfOutput a = vrf_evaluate(kp.sk, str_bytes("round-1"));
    VrfOutput b = vrf_evaluate(kp.sk, str_bytes("round-1"));
    CHECK(a == b);
    CHECK(a.hash.bytes.size() == 32);
}

TEST_CASE("inputs differing in one byte give distinct hashes over 10^4 trials") {
    KeyPair kp = keygen(Bytes(32, 9));
    std::set<std::array<std::uint8_t, 32>> hashes;
    Bytes input(8, 0);
    for (int i = 0; i < 10000; ++i) {
        input[0] = static_cast<std::uint8_t>(i & 0xff);
        input[1] = static_cast<std::uint8_t>((i >> 8) & 0xff);
        hashes.insert(vrf_evaluate(kp.sk, input).hash.bytes);
    }
    CHECK(hashes.size() == 10000);
}

TEST_CASE("vrf round trip verifies; wrong key fails") {
    KeyPair kp = keygen(Bytes(32, 3));
    KeyPair other = keygen(Bytes(32, 4));
    Bytes input = str_bytes("some query seed");
    VrfOutput out = vrf_evaluate(kp.sk, input);
    CHECK(vrf_verify(kp.pk, input, out));
    CHECK_FALSE(vrf_verify(other.pk, input, out));
    CHECK_FALSE(vrf_verify(kp.pk, str_bytes("different input"), out));
}

TEST_CASE("any single flipped bit in the proof falsifies verification") {
    KeyPair kp = keygen(Bytes(32, 11));
    Bytes input = str_bytes("fuzz target");
    VrfOutput honest = vrf_evaluate(kp.sk, input);
    for (std::size_t pos = 0; pos < honest.proof.size(); ++pos) {
        VrfOutput mutated = honest;
        mutated.proof[pos] ^= 0x01;
        CHECK_FALSE(vrf_verify(kp.pk, input, mutated));
    }
}

TEST_CASE("mutated hashes never verify (uniqueness)") {
    KeyPair kp = keygen(Bytes(32, 13));
    Bytes input = str_bytes("uniqueness");
    VrfOutput honest = vrf_evaluate(kp.sk, input);
    for (std::size_t pos = 0; pos < honest.hash.bytes.size(); ++pos) {
        VrfOutput mutated = honest;
        mutated.hash.bytes[pos] ^= 0xff;
        CHECK_FALSE(vrf_verify(kp.pk, input, mutated));
    }
}

TEST_CASE("hash bits are balanced within 3 sigma over 10^4 evaluations") {
    KeyPair kp = keygen(Bytes(32, 21));
    const int evaluations = 10000;
    std::uint64_t ones = 0;
    std::uint64_t byte_histogram[256] = {};
    Bytes input(8, 0);
    for (int i = 0; i < evaluations; ++i) {
        input[0] = static_cast<std::uint8_t>(i & 0xff);
        input[1] = static_cast<std::uint8_t>((i >> 8) & 0xff);
        input[2] = static_cast<std::uint8_t>((i >> 16) & 0xff);
        Digest256 h = vrf_evaluate(kp.sk, input).hash;
        for (std::uint8_t byte : h.bytes) {
            ++byte_histogram[byte];
            for (int bit = 0; bit < 8; ++bit) {
                ones += (byte >> bit) & 1;
            }
        }
    }
    const double total_bits = evaluations * 256.0;
    const double freq = static_cast<double>(ones) / total_bits;
    const double sigma = 0.5 / std::sqrt(total_bits);
    CHECK(std::abs(freq - 0.5) < 3.0 * sigma);

    // Byte histogram via chi-square at the same significance.
    std::vector<double> observed(256);
    std::vector<double> expected(256, evaluations * 32.0 / 256.0);
    for (int b = 0; b < 256; ++b) {
        observed[static_cast<std::size_t>(b)] = static_cast<double>(byte_histogram[b]);
    }
    // 255 df is beyond the table; use the normal approximation to the
    // chi-square 0.99 quantile: df + 2.3263 * sqrt(2 df).
    auto cs = test_support::chi_square(observed, expected);
    const double df = static_cast<double>(cs.degrees_of_freedom);
    const double critical = df + 2.3263 * std::sqrt(2.0 * df) + 1.0;
    CHECK(cs.statistic < critical);
}

TEST_CASE("concurrent evaluation and verification agree with serial results") {
    KeyPair kp = keygen(Bytes(32, 31));
    std::vector<std::thread> threads;
    std::vector<int> ok(8, 0);
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            Bytes input{static_cast<std::uint8_t>(t)};
            VrfOutput out = vrf_evaluate(kp.sk, input);
            ok[static_cast<std::size_t>(t)] = vrf_verify(kp.pk, input, out) ? 1 : 0;
        });
    }
    for (auto& thread : threads) {
        thread.join();
    }
    for (int result : ok) {
        CHECK(result == 1);
    }
}

TEST_CASE("hash_ratio maps digests into [0,1)") {
    Digest256 zero{};
    CHECK(hash_ratio(zero) == 0.0);

    Digest256 ones;
    ones.bytes.fill(0xff);
    double r = hash_ratio(ones);
    CHECK(r < 1.0);
    CHECK(r > 0.9999);

    KeyPair kp = keygen(Bytes(32, 17));
    for (int i = 0; i < 100; ++i) {
        Bytes input{static_cast<std::uint8_t>(i)};
        double ratio = hash_ratio(vrf_evaluate(kp.sk, input).hash);
        CHECK(ratio >= 0.0);
        CHECK(ratio < 1.0);
    }
}
