#ifndef WEB3DB_ENGINE_PLAN_HPP
#define WEB3DB_ENGINE_PLAN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "web3db/engine/ast.hpp"
#include "web3db/table.hpp"

namespace web3db::engine {

struct TableInfo {
    std::string name;
    std::vector<Column> columns;
    std::size_t row_count = 0;
};

struct BoundPredicate {
    std::size_t col = 0;  // index into the logical (joined) row
    CompareOp op = CompareOp::eq;
    Value literal;
};

struct BoundItem {
    AggregateFn fn = AggregateFn::none;
    bool count_star = false;
    std::size_t col = 0;  // logical index; unused for count(*)
    ColumnType col_type = ColumnType::integer;
    std::string name;  // output column name
};

// Name-resolved, type-checked select. The logical row is the from-table
// columns followed by the join-table columns.
struct BoundSelect {
    SelectStatement stmt;
    std::vector<Column> logical_columns;
    std::size_t from_width = 0;
    bool has_join = false;
    bool probe_is_from = true;  // false: the join side is partitioned
    std::size_t join_from_col = 0;  // logical index of the from-side key
    std::size_t join_join_col = 0;  // logical index of the join-side key
    std::vector<BoundPredicate> predicates;
    std::vector<std::size_t> group_cols;
    std::vector<BoundItem> items;
    bool aggregated = false;
    std::optional<std::size_t> order_output_col;
    bool order_ascending = true;
    std::optional<std::uint64_t> limit;
    std::vector<Column> output_columns;
};

BoundSelect bind_select(const SelectStatement& stmt, const TableInfo& from_info,
                        const std::optional<TableInfo>& join_info);

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    bool operator==(const RowRange&) const = default;
    std::size_t size() const { return end - begin; }
};

// Contiguous row ranges over the probe side, sizes balanced within one row.
std::vector<RowRange> partition_rows(std::size_t row_count, std::uint32_t worker_count);

struct ExecutionPlan {
    BoundSelect bound;
    std::string probe_table;
    std::optional<std::string> broadcast_table;  // smaller join side
    std::vector<RowRange> partitions;
    std::uint32_t worker_count = 1;
};

ExecutionPlan plan(const SelectStatement& stmt, const TableInfo& from_info,
                   const std::optional<TableInfo>& join_info, std::uint32_t worker_count);

}  // namespace web3db::engine

#endif
