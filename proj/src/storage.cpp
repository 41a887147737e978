#include "web3db/storage.hpp"

#include "json.hpp"

namespace web3db::storage {

namespace {

void append_field(Bytes& out, const std::string& text) {
    append_u32_be(out, static_cast<std::uint32_t>(text.size()));
    append_str(out, text);
}

std::string read_field(ByteView in, std::size_t& offset) {
    std::uint32_t len = read_u32_be(in, offset);
    offset += 4;
    if (offset + len > in.size()) {
        throw ArgumentError("truncated block field");
    }
    std::string out(reinterpret_cast<const char*>(in.data() + offset), len);
    offset += len;
    return out;
}

Digest256 read_digest(ByteView in, std::size_t& offset) {
    if (offset + 32 > in.size()) {
        throw ArgumentError("truncated block digest");
    }
    Digest256 d;
    std::copy(in.begin() + static_cast<std::ptrdiff_t>(offset),
              in.begin() + static_cast<std::ptrdiff_t>(offset + 32), d.bytes.begin());
    offset += 32;
    return d;
}

constexpr std::string_view kSchemaTag = "w3db-schema";
constexpr std::string_view kRowsTag = "w3db-rows";
constexpr std::string_view kManifestTag = "w3db-manifest";
constexpr std::string_view kDatabaseTag = "w3db-database";

void check_tag(ByteView block, std::string_view tag, std::size_t& offset) {
    if (block.size() < tag.size() ||
        std::string_view(reinterpret_cast<const char*>(block.data()), tag.size()) != tag) {
        throw ArgumentError("block is not a " + std::string(tag));
    }
    offset = tag.size();
}

}  // namespace

Bytes encode_schema_block(const Table& table) {
    Bytes out;
    append_str(out, kSchemaTag);
    append_u32_be(out, static_cast<std::uint32_t>(table.columns.size()));
    for (const Column& col : table.columns) {
        append_field(out, col.name);
        append_field(out, column_type_name(col.type));
    }
    return out;
}

std::vector<Column> decode_schema_block(ByteView block) {
    std::size_t offset = 0;
    check_tag(block, kSchemaTag, offset);
    std::uint32_t count = read_u32_be(block, offset);
    offset += 4;
    std::vector<Column> columns;
    columns.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = read_field(block, offset);
        std::string type = read_field(block, offset);
        columns.push_back(Column{name, column_type_from_name(type)});
    }
    return columns;
}

Bytes encode_row_block(const Table& table, std::size_t first_row, std::size_t row_count) {
    Bytes out;
    append_str(out, kRowsTag);
    append_u32_be(out, static_cast<std::uint32_t>(row_count));
    for (std::size_t r = first_row; r < first_row + row_count; ++r) {
        for (const Value& v : table.rows[r]) {
            append_field(out, render_value(v));
        }
    }
    return out;
}

std::vector<std::vector<Value>> decode_row_block(ByteView block,
                                                 const std::vector<Column>& columns) {
    std::size_t offset = 0;
    check_tag(block, kRowsTag, offset);
    std::uint32_t count = read_u32_be(block, offset);
    offset += 4;
    std::vector<std::vector<Value>> rows;
    rows.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        std::vector<Value> row;
        row.reserve(columns.size());
        for (const Column& col : columns) {
            row.push_back(parse_value(col.type, read_field(block, offset)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Bytes encode_manifest(const TableManifest& manifest) {
    Bytes out;
    append_str(out, kManifestTag);
    append_field(out, manifest.table_name);
    append_u32_be(out, manifest.rows_per_block);
    append_bytes(out, manifest.schema_hash.bytes);
    append_u32_be(out, static_cast<std::uint32_t>(manifest.row_block_hashes.size()));
    for (const ContentHash& h : manifest.row_block_hashes) {
        append_bytes(out, h.bytes);
    }
    return out;
}

TableManifest decode_manifest(ByteView block) {
    std::size_t offset = 0;
    check_tag(block, kManifestTag, offset);
    TableManifest m;
    m.table_name = read_field(block, offset);
    m.rows_per_block = read_u32_be(block, offset);
    offset += 4;
    m.schema_hash = read_digest(block, offset);
    std::uint32_t count = read_u32_be(block, offset);
    offset += 4;
    for (std::uint32_t i = 0; i < count; ++i) {
        m.row_block_hashes.push_back(read_digest(block, offset));
    }
    return m;
}

std::string TableManifest::to_json() const {
    nlohmann::ordered_json out;
    out["schema_hash"] = schema_hash.hex();
    out["blocks"] = nlohmann::ordered_json::array();
    for (const ContentHash& h : row_block_hashes) {
        out["blocks"].push_back(h.hex());
    }
    out["rows_per_block"] = rows_per_block;
    out["table_name"] = table_name;
    return out.dump();
}

BlockStore::BlockStore(std::uint32_t node_count, std::uint32_t replication_factor)
    : node_count_(node_count),
      replication_factor_(replication_factor),
      node_failed_(node_count, false) {
    if (node_count_ < 1) {
        throw ConfigError("block store needs at least one node");
    }
    if (replication_factor_ < 1 || replication_factor_ > node_count_) {
        throw ConfigError("replication factor must be in [1, node count]");
    }
}

std::vector<std::uint32_t> BlockStore::ring_positions(const ContentHash& hash,
                                                      std::uint32_t replica_count) const {
    std::uint32_t start = read_u32_be(hash.bytes, 0) % node_count_;
    std::vector<std::uint32_t> out;
    for (std::uint32_t k = 0; k < replica_count; ++k) {
        out.push_back((start + k) % node_count_);
    }
    return out;
}

ContentHash BlockStore::put(ByteView block) {
    if (block.empty()) {
        throw ArgumentError("cannot store an empty block");
    }
    ContentHash hash = sha256(block);
    auto [it, inserted] = blocks_.try_emplace(hash);
    if (inserted) {
        it->second.bytes.assign(block.begin(), block.end());
    }
    for (std::uint32_t node : ring_positions(hash, replication_factor_)) {
        it->second.replicas.insert(node);
    }
    return hash;
}

Bytes BlockStore::get(const ContentHash& hash) const {
    auto it = blocks_.find(hash);
    if (it != blocks_.end()) {
        for (std::uint32_t node : it->second.replicas) {
            if (!node_failed_[node]) {
                return it->second.bytes;
            }
        }
    }
    throw UnavailableError("no live replica for block " + hash.hex());
}

bool BlockStore::has(const ContentHash& hash) const {
    auto it = blocks_.find(hash);
    if (it == blocks_.end()) {
        return false;
    }
    for (std::uint32_t node : it->second.replicas) {
        if (!node_failed_[node]) {
            return true;
        }
    }
    return false;
}

void BlockStore::replicate(const ContentHash& hash, std::uint32_t replica_count) {
    if (replica_count > node_count_) {
        throw ArgumentError("replica count exceeds storage node count");
    }
    auto it = blocks_.find(hash);
    if (it == blocks_.end()) {
        throw NotFoundError("cannot replicate unknown block " + hash.hex());
    }
    for (std::uint32_t node : ring_positions(hash, replica_count)) {
        it->second.replicas.insert(node);
    }
}

void BlockStore::fail_node(std::uint32_t node_id) {
    if (node_id >= node_count_) {
        throw ArgumentError("unknown storage node " + std::to_string(node_id));
    }
    node_failed_[node_id] = true;
}

std::vector<std::pair<ContentHash, Bytes>> BlockStore::export_blocks() const {
    std::vector<std::pair<ContentHash, Bytes>> out;
    out.reserve(blocks_.size());
    for (const auto& [hash, stored] : blocks_) {
        out.emplace_back(hash, stored.bytes);
    }
    return out;
}

ContentHash BlockStore::put_table(const Table& table, std::uint32_t rows_per_block) {
    if (rows_per_block < 1) {
        throw ArgumentError("rows_per_block must be >= 1");
    }
    table.validate();
    TableManifest manifest;
    manifest.table_name = table.name;
    manifest.rows_per_block = rows_per_block;
    manifest.schema_hash = put(encode_schema_block(table));
    for (std::size_t first = 0; first < table.rows.size(); first += rows_per_block) {
        std::size_t count = std::min<std::size_t>(rows_per_block, table.rows.size() - first);
        manifest.row_block_hashes.push_back(put(encode_row_block(table, first, count)));
    }
    return put(encode_manifest(manifest));
}

TableManifest BlockStore::get_manifest(const ContentHash& manifest_hash) const {
    return decode_manifest(get(manifest_hash));
}

Table BlockStore::get_table(const ContentHash& manifest_hash) const {
    TableManifest manifest = get_manifest(manifest_hash);
    Table table;
    table.name = manifest.table_name;
    table.columns = decode_schema_block(get(manifest.schema_hash));
    for (const ContentHash& block_hash : manifest.row_block_hashes) {
        auto rows = decode_row_block(get(block_hash), table.columns);
        for (auto& row : rows) {
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

ContentHash BlockStore::put_database_manifest(const std::map<std::string, ContentHash>& tables) {
    Bytes out;
    append_str(out, kDatabaseTag);
    append_u32_be(out, static_cast<std::uint32_t>(tables.size()));
    for (const auto& [name, hash] : tables) {
        append_field(out, name);
        append_bytes(out, hash.bytes);
    }
    return put(out);
}

std::map<std::string, ContentHash> BlockStore::get_database_manifest(
    const ContentHash& hash) const {
    Bytes block = get(hash);
    std::size_t offset = 0;
    check_tag(block, kDatabaseTag, offset);
    std::uint32_t count = read_u32_be(block, offset);
    offset += 4;
    std::map<std::string, ContentHash> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = read_field(block, offset);
        out[name] = read_digest(block, offset);
    }
    return out;
}

}  // namespace web3db::storage
