#ifndef WEB3DB_COMMON_HPP
#define WEB3DB_COMMON_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace web3db {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Error taxonomy. Verification-style operations never throw; they return
// false / 0 / nullopt instead. Everything else reports failures through
// one of these.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ArgumentError : Error {
    using Error::Error;
};
struct KeyError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ConflictError : Error {
    using Error::Error;
};
struct AuthError : Error {
    using Error::Error;
};
struct OwnershipError : Error {
    using Error::Error;
};
struct NotFoundError : Error {
    using Error::Error;
};
struct UnavailableError : Error {
    using Error::Error;
};
struct PlanError : Error {
    using Error::Error;
};
struct RefusalError : Error {
    using Error::Error;
};
struct IncompleteError : Error {
    using Error::Error;
};
struct TamperError : Error {
    using Error::Error;
};

std::string to_hex(ByteView data);
Bytes from_hex(const std::string& hex);

inline void append_bytes(Bytes& out, ByteView more) {
    out.insert(out.end(), more.begin(), more.end());
}

inline void append_str(Bytes& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
}

// Fixed-width big-endian encoding, used wherever integers feed a digest or
// signature so the byte layout is unambiguous.
inline void append_u64_be(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

inline void append_u32_be(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
    }
}

inline std::uint64_t read_u64_be(ByteView in, std::size_t offset) {
    if (offset + 8 > in.size()) {
        throw ArgumentError("read_u64_be: out of range");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        v = (v << 8) | in[offset + i];
    }
    return v;
}

inline std::uint32_t read_u32_be(ByteView in, std::size_t offset) {
    if (offset + 4 > in.size()) {
        throw ArgumentError("read_u32_be: out of range");
    }
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        v = (v << 8) | in[offset + i];
    }
    return v;
}

}  // namespace web3db

#endif
