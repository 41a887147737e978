#ifndef WEB3DB_STORAGE_HPP
#define WEB3DB_STORAGE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "web3db/common.hpp"
#include "web3db/crypto.hpp"
#include "web3db/table.hpp"

namespace web3db::storage {

// A block's address is the digest of its exact bytes.
using ContentHash = Digest256;

struct TableManifest {
    ContentHash schema_hash;
    std::vector<ContentHash> row_block_hashes;
    std::uint32_t rows_per_block = 0;
    std::string table_name;

    bool operator==(const TableManifest&) const = default;

    std::string to_json() const;  // {schema_hash, blocks[], rows_per_block}
};

// Canonical table encoding: every field rendered to its canonical text
// form and length-prefixed, so semantically equal tables always produce
// identical blocks and identical hashes.
Bytes encode_schema_block(const Table& table);
std::vector<Column> decode_schema_block(ByteView block);
Bytes encode_row_block(const Table& table, std::size_t first_row, std::size_t row_count);
std::vector<std::vector<Value>> decode_row_block(ByteView block, const std::vector<Column>& columns);
Bytes encode_manifest(const TableManifest& manifest);
TableManifest decode_manifest(ByteView block);

// Content-addressed block store over simulated storage nodes. Blocks are
// immutable; puts are idempotent; a block is readable while at least one
// pinned replica is on a live node.
class BlockStore {
public:
    BlockStore(std::uint32_t node_count, std::uint32_t replication_factor);

    ContentHash put(ByteView block);
    Bytes get(const ContentHash& hash) const;  // UnavailableError
    bool has(const ContentHash& hash) const;

    void replicate(const ContentHash& hash, std::uint32_t replica_count);
    void fail_node(std::uint32_t node_id);
    std::uint32_t node_count() const { return node_count_; }
    std::size_t unique_block_count() const { return blocks_.size(); }
    std::vector<std::pair<ContentHash, Bytes>> export_blocks() const;  // hash order

    // --- table layer ---
    ContentHash put_table(const Table& table, std::uint32_t rows_per_block);
    Table get_table(const ContentHash& manifest_hash) const;
    TableManifest get_manifest(const ContentHash& manifest_hash) const;

    // One manifest per table plus a database-level manifest of table
    // manifests.
    ContentHash put_database_manifest(const std::map<std::string, ContentHash>& tables);
    std::map<std::string, ContentHash> get_database_manifest(const ContentHash& hash) const;

private:
    struct StoredBlock {
        Bytes bytes;
        std::set<std::uint32_t> replicas;
    };

    std::vector<std::uint32_t> ring_positions(const ContentHash& hash,
                                              std::uint32_t replica_count) const;

    std::uint32_t node_count_;
    std::uint32_t replication_factor_;
    std::vector<bool> node_failed_;
    std::map<ContentHash, StoredBlock> blocks_;
};

}  // namespace web3db::storage

#endif
