#ifndef WEB3DB_ENGINE_EXECUTE_HPP
#define WEB3DB_ENGINE_EXECUTE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "web3db/engine/cache.hpp"
#include "web3db/engine/plan.hpp"
#include "web3db/table.hpp"

namespace web3db::engine {

struct QueryResult {
    std::vector<Column> columns;
    std::vector<std::vector<Value>> rows;

    bool operator==(const QueryResult&) const = default;

    std::string to_csv() const;   // header row, RFC 4180 quoting
    std::string to_json() const;  // array of row objects
    Bytes canonical_bytes() const;
};

// Sum and count are carried separately so averages merge exactly.
struct AggState {
    long long sum = 0;  // raw for integers, scaled for decimals
    long long count = 0;
    std::optional<Value> min_value;
    std::optional<Value> max_value;
};

struct PartialResult {
    std::uint32_t worker_index = 0;
    std::uint32_t worker_count = 1;
    bool aggregated = false;
    // Aggregated form: group key (values of group_cols) -> per-item states,
    // sorted by key for determinism.
    std::vector<std::pair<std::vector<Value>, std::vector<AggState>>> groups;
    // Plain form: projected rows.
    std::vector<std::vector<Value>> rows;
    std::uint64_t bytes_processed = 0;
};

// Executes one plan fragment over a partition of the probe side. The
// broadcast table must be present exactly when the plan has a join.
PartialResult execute_fragment(const BoundSelect& bound, const Table& probe, RowRange range,
                               const Table* broadcast, std::uint32_t worker_index,
                               std::uint32_t worker_count);

// Fragment execution as performed by a worker node: registers every data
// transfer (partition slice and broadcast copy) in the node's cache
// registry before evaluating.
PartialResult worker_execute(const BoundSelect& bound, const Table& probe, RowRange range,
                             const Table* broadcast, std::uint32_t worker_index,
                             std::uint32_t worker_count, CacheRegistry& cache,
                             const Digest256& partition_id, const Digest256& broadcast_id);

// Combines worker partials into the final result: group-wise merge, final
// projection, ORDER BY (stable, full-row tiebreak), LIMIT last. A missing
// worker index raises IncompleteError.
QueryResult merge_partials(const BoundSelect& bound, std::vector<PartialResult> partials);

// Single-node oracle: a direct evaluation with no partitioning, used as
// ground truth by the equivalence tests.
QueryResult reference_execute(const QueryAst& ast, const std::map<std::string, Table>& tables);

// Approximate in-memory footprint of a set of rows, used by the cache
// registry accounting.
std::uint64_t rows_byte_size(const std::vector<std::vector<Value>>& rows);
std::uint64_t rows_byte_size(const Table& table, RowRange range);

}  // namespace web3db::engine

#endif
