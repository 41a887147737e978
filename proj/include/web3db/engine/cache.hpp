#ifndef WEB3DB_ENGINE_CACHE_HPP
#define WEB3DB_ENGINE_CACHE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "web3db/crypto.hpp"

namespace web3db::engine {

// Working-memory ledger for one node: every data transfer registers an
// entry; purging removes everything.
class CacheRegistry {
public:
    void register_entry(const Digest256& hash, std::uint64_t bytes) {
        entries_[hash] = bytes;
    }

    std::uint64_t total_bytes() const {
        std::uint64_t sum = 0;
        for (const auto& [hash, bytes] : entries_) {
            sum += bytes;
        }
        return sum;
    }

    std::size_t entry_count() const { return entries_.size(); }

    std::uint64_t purge() {
        std::uint64_t freed = total_bytes();
        entries_.clear();
        return freed;
    }

private:
    std::map<Digest256, std::uint64_t> entries_;
};

struct PurgeReport {
    std::vector<std::pair<std::string, std::uint64_t>> freed_per_node;  // (node id, bytes)
    std::uint64_t total_freed = 0;
};

}  // namespace web3db::engine

#endif
