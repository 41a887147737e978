#include "web3db/engine/plan.hpp"

#include <algorithm>

namespace web3db::engine {

namespace {

// Resolves a possibly-qualified column reference against the logical
// schema. Unqualified names must be unambiguous.
std::size_t resolve_column(const ColumnRef& ref, const TableInfo& from_info,
                           const std::optional<TableInfo>& join_info) {
    std::vector<std::size_t> matches;
    if (ref.table.empty() || ref.table == from_info.name) {
        for (std::size_t i = 0; i < from_info.columns.size(); ++i) {
            if (from_info.columns[i].name == ref.column) {
                matches.push_back(i);
            }
        }
    }
    if (join_info && (ref.table.empty() || ref.table == join_info->name)) {
        for (std::size_t i = 0; i < join_info->columns.size(); ++i) {
            if (join_info->columns[i].name == ref.column) {
                matches.push_back(from_info.columns.size() + i);
            }
        }
    }
    if (matches.empty()) {
        throw PlanError("unknown column '" + ref.display() + "'");
    }
    if (matches.size() > 1) {
        throw PlanError("ambiguous column '" + ref.display() + "'; qualify with a table name");
    }
    return matches.front();
}

Value bind_literal(const Literal& lit, ColumnType type, const std::string& column_name) {
    try {
        switch (type) {
            case ColumnType::integer:
                if (lit.quoted || lit.text.find('.') != std::string::npos) {
                    break;
                }
                return parse_value(ColumnType::integer, lit.text);
            case ColumnType::decimal:
                if (lit.quoted) {
                    break;
                }
                return parse_value(ColumnType::decimal, lit.text);
            case ColumnType::text:
                if (!lit.quoted) {
                    break;
                }
                return lit.text;
            case ColumnType::date:
                if (!lit.quoted) {
                    break;
                }
                return parse_value(ColumnType::date, lit.text);
        }
    } catch (const ArgumentError& e) {
        throw PlanError("literal '" + lit.text + "' does not fit column '" + column_name +
                        "': " + e.what());
    }
    throw PlanError("literal '" + lit.text + "' does not match the " + column_type_name(type) +
                    " column '" + column_name + "'");
}

}  // namespace

BoundSelect bind_select(const SelectStatement& stmt, const TableInfo& from_info,
                        const std::optional<TableInfo>& join_info) {
    if (stmt.join.has_value() != join_info.has_value()) {
        throw PlanError("join table info does not match the statement");
    }

    BoundSelect bound;
    bound.stmt = stmt;
    bound.from_width = from_info.columns.size();
    bound.has_join = join_info.has_value();

    for (const Column& col : from_info.columns) {
        bound.logical_columns.push_back(col);
    }
    if (join_info) {
        for (const Column& col : join_info->columns) {
            bound.logical_columns.push_back(col);
        }
    }

    if (join_info) {
        std::size_t left = resolve_column(stmt.join->left, from_info, join_info);
        std::size_t right = resolve_column(stmt.join->right, from_info, join_info);
        bool left_is_from = left < bound.from_width;
        bool right_is_from = right < bound.from_width;
        if (left_is_from == right_is_from) {
            throw PlanError("join condition must pair one column from each table");
        }
        bound.join_from_col = left_is_from ? left : right;
        bound.join_join_col = left_is_from ? right : left;
        if (bound.logical_columns[bound.join_from_col].type !=
            bound.logical_columns[bound.join_join_col].type) {
            throw PlanError("join key types differ");
        }
        // The smaller side is broadcast; the larger side is partitioned.
        bound.probe_is_from = from_info.row_count >= join_info->row_count;
    }

    for (const Predicate& pred : stmt.where) {
        BoundPredicate bp;
        bp.col = resolve_column(pred.column, from_info, join_info);
        bp.op = pred.op;
        bp.literal = bind_literal(pred.literal, bound.logical_columns[bp.col].type,
                                  pred.column.display());
        bound.predicates.push_back(std::move(bp));
    }

    for (const ColumnRef& ref : stmt.group_by) {
        bound.group_cols.push_back(resolve_column(ref, from_info, join_info));
    }

    // Expand the select list.
    std::vector<SelectItem> items = stmt.items;
    if (stmt.select_star) {
        if (!stmt.group_by.empty()) {
            throw PlanError("SELECT * cannot be combined with GROUP BY");
        }
        items.clear();
        for (std::size_t i = 0; i < from_info.columns.size(); ++i) {
            SelectItem item;
            item.column =
                ColumnRef{join_info ? from_info.name : "", from_info.columns[i].name};
            items.push_back(item);
        }
        if (join_info) {
            for (std::size_t i = 0; i < join_info->columns.size(); ++i) {
                SelectItem item;
                item.column = ColumnRef{join_info->name, join_info->columns[i].name};
                items.push_back(item);
            }
        }
    }
    if (items.empty()) {
        throw PlanError("select list is empty");
    }

    bool any_aggregate = false;
    for (const SelectItem& item : items) {
        if (item.aggregate != AggregateFn::none) {
            any_aggregate = true;
        }
    }
    bound.aggregated = any_aggregate || !stmt.group_by.empty();

    for (const SelectItem& item : items) {
        BoundItem bi;
        bi.fn = item.aggregate;
        bi.count_star = item.count_star;
        bi.name = item.display();
        if (!item.count_star) {
            bi.col = resolve_column(item.column, from_info, join_info);
            bi.col_type = bound.logical_columns[bi.col].type;
        }
        if (bi.fn == AggregateFn::sum || bi.fn == AggregateFn::avg) {
            if (bi.col_type != ColumnType::integer && bi.col_type != ColumnType::decimal) {
                throw PlanError(aggregate_fn_name(bi.fn) + " needs a numeric column, '" +
                                bi.name + "' is " + column_type_name(bi.col_type));
            }
        }
        if (bound.aggregated && bi.fn == AggregateFn::none) {
            if (std::find(bound.group_cols.begin(), bound.group_cols.end(), bi.col) ==
                bound.group_cols.end()) {
                throw PlanError("column '" + bi.name +
                                "' must appear in GROUP BY or inside an aggregate");
            }
        }

        Column out;
        out.name = bi.name;
        switch (bi.fn) {
            case AggregateFn::none:
                out.type = bi.col_type;
                break;
            case AggregateFn::count:
                out.type = ColumnType::integer;
                break;
            case AggregateFn::sum:
                out.type = bi.col_type;
                break;
            case AggregateFn::avg:
                out.type = ColumnType::decimal;
                break;
            case AggregateFn::min:
            case AggregateFn::max:
                out.type = bi.col_type;
                break;
        }
        bound.output_columns.push_back(out);
        bound.items.push_back(std::move(bi));
    }

    if (stmt.order_by) {
        const std::string wanted = stmt.order_by->item.display();
        for (std::size_t i = 0; i < bound.output_columns.size(); ++i) {
            if (bound.output_columns[i].name == wanted ||
                (stmt.order_by->item.aggregate == AggregateFn::none &&
                 bound.items[i].fn == AggregateFn::none && !bound.items[i].count_star &&
                 stmt.order_by->item.column.table.empty() &&
                 bound.logical_columns[bound.items[i].col].name == wanted)) {
                bound.order_output_col = i;
                break;
            }
        }
        if (!bound.order_output_col) {
            throw PlanError("ORDER BY column '" + wanted + "' is not in the select list");
        }
        bound.order_ascending = stmt.order_by->ascending;
    }
    bound.limit = stmt.limit;
    return bound;
}

std::vector<RowRange> partition_rows(std::size_t row_count, std::uint32_t worker_count) {
    if (worker_count < 1) {
        throw PlanError("worker count must be >= 1");
    }
    std::vector<RowRange> out;
    std::size_t base = row_count / worker_count;
    std::size_t extra = row_count % worker_count;
    std::size_t cursor = 0;
    for (std::uint32_t w = 0; w < worker_count; ++w) {
        std::size_t size = base + (w < extra ? 1 : 0);
        out.push_back(RowRange{cursor, cursor + size});
        cursor += size;
    }
    return out;
}

ExecutionPlan plan(const SelectStatement& stmt, const TableInfo& from_info,
                   const std::optional<TableInfo>& join_info, std::uint32_t worker_count) {
    ExecutionPlan p;
    p.bound = bind_select(stmt, from_info, join_info);
    p.worker_count = worker_count;
    if (p.bound.has_join) {
        const TableInfo& probe = p.bound.probe_is_from ? from_info : *join_info;
        const TableInfo& bcast = p.bound.probe_is_from ? *join_info : from_info;
        p.probe_table = probe.name;
        p.broadcast_table = bcast.name;
        p.partitions = partition_rows(probe.row_count, worker_count);
    } else {
        p.probe_table = from_info.name;
        p.partitions = partition_rows(from_info.row_count, worker_count);
    }
    return p;
}

}  // namespace web3db::engine
