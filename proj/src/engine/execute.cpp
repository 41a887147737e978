#include "web3db/engine/execute.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace web3db::engine {

namespace {

bool evaluate_compare(const Value& lhs, CompareOp op, const Value& rhs) {
    switch (op) {
        case CompareOp::eq: return value_equal(lhs, rhs);
        case CompareOp::ne: return !value_equal(lhs, rhs);
        case CompareOp::lt: return value_less(lhs, rhs);
        case CompareOp::gt: return value_less(rhs, lhs);
        case CompareOp::le: return !value_less(rhs, lhs);
        case CompareOp::ge: return !value_less(lhs, rhs);
    }
    throw ArgumentError("unknown compare op");
}

bool row_passes(const std::vector<BoundPredicate>& predicates, const std::vector<Value>& row) {
    for (const BoundPredicate& pred : predicates) {
        if (!evaluate_compare(row[pred.col], pred.op, pred.literal)) {
            return false;
        }
    }
    return true;
}

struct KeyLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
            if (value_less(a[i], b[i])) return true;
            if (value_less(b[i], a[i])) return false;
        }
        return a.size() < b.size();
    }
};

long long scaled_numeric(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v)) {
        return std::get<std::int64_t>(v);
    }
    return std::get<Decimal>(v).scaled;
}

void accumulate(AggState& state, AggregateFn fn, const Value& v) {
    switch (fn) {
        case AggregateFn::count:
            state.count += 1;
            break;
        case AggregateFn::sum:
        case AggregateFn::avg:
            state.sum += scaled_numeric(v);
            state.count += 1;
            break;
        case AggregateFn::min:
            if (!state.min_value || value_less(v, *state.min_value)) {
                state.min_value = v;
            }
            break;
        case AggregateFn::max:
            if (!state.max_value || value_less(*state.max_value, v)) {
                state.max_value = v;
            }
            break;
        case AggregateFn::none:
            break;
    }
}

void merge_state(AggState& into, const AggState& from) {
    into.sum += from.sum;
    into.count += from.count;
    if (from.min_value && (!into.min_value || value_less(*from.min_value, *into.min_value))) {
        into.min_value = from.min_value;
    }
    if (from.max_value && (!into.max_value || value_less(*into.max_value, *from.max_value))) {
        into.max_value = from.max_value;
    }
}

long long round_div(__int128 numerator, long long denominator) {
    __int128 half = denominator / 2;
    __int128 q = numerator >= 0 ? (numerator + half) / denominator
                                : (numerator - half) / denominator;
    return static_cast<long long>(q);
}

Value finalize_item(const BoundItem& item, const AggState& state) {
    switch (item.fn) {
        case AggregateFn::count:
            return static_cast<std::int64_t>(state.count);
        case AggregateFn::sum:
            if (item.count_star) {
                throw ArgumentError("sum(*) is not a thing");
            }
            if (item.col_type == ColumnType::integer) {
                return static_cast<std::int64_t>(state.sum);
            }
            return Decimal::from_scaled(state.sum);
        case AggregateFn::avg:
            if (state.count == 0) {
                throw Error("avg over empty input");
            }
            if (item.col_type == ColumnType::integer) {
                return Decimal::from_scaled(
                    round_div(static_cast<__int128>(state.sum) * 10000, state.count));
            }
            return Decimal::from_scaled(round_div(state.sum, state.count));
        case AggregateFn::min:
            if (!state.min_value) {
                throw Error("min over empty input");
            }
            return *state.min_value;
        case AggregateFn::max:
            if (!state.max_value) {
                throw Error("max over empty input");
            }
            return *state.max_value;
        case AggregateFn::none:
            break;
    }
    throw ArgumentError("finalize on a non-aggregate item");
}

// Sort comparator: the ORDER BY column first, then the full row
// lexicographically ascending for determinism.
struct OutputRowLess {
    std::size_t order_col;
    bool ascending;

    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        const Value& x = a[order_col];
        const Value& y = b[order_col];
        if (value_less(x, y)) return ascending;
        if (value_less(y, x)) return !ascending;
        KeyLess lex;
        return lex(a, b);
    }
};

std::vector<Value> project_plain(const BoundSelect& bound, const std::vector<Value>& logical) {
    std::vector<Value> out;
    out.reserve(bound.items.size());
    for (const BoundItem& item : bound.items) {
        out.push_back(logical[item.col]);
    }
    return out;
}

std::vector<Value> group_key_of(const BoundSelect& bound, const std::vector<Value>& logical) {
    std::vector<Value> key;
    key.reserve(bound.group_cols.size());
    for (std::size_t col : bound.group_cols) {
        key.push_back(logical[col]);
    }
    return key;
}

}  // namespace

std::uint64_t rows_byte_size(const std::vector<std::vector<Value>>& rows) {
    std::uint64_t bytes = 0;
    for (const auto& row : rows) {
        for (const Value& v : row) {
            bytes += 4 + render_value(v).size();
        }
    }
    return bytes;
}

std::uint64_t rows_byte_size(const Table& table, RowRange range) {
    std::uint64_t bytes = 0;
    for (std::size_t r = range.begin; r < range.end && r < table.rows.size(); ++r) {
        for (const Value& v : table.rows[r]) {
            bytes += 4 + render_value(v).size();
        }
    }
    return bytes;
}

PartialResult execute_fragment(const BoundSelect& bound, const Table& probe, RowRange range,
                               const Table* broadcast, std::uint32_t worker_index,
                               std::uint32_t worker_count) {
    if (bound.has_join != (broadcast != nullptr)) {
        throw ArgumentError("broadcast table must be present exactly for joins");
    }
    if (range.end > probe.rows.size() || range.begin > range.end) {
        throw ArgumentError("fragment range outside the partition");
    }

    PartialResult partial;
    partial.worker_index = worker_index;
    partial.worker_count = worker_count;
    partial.aggregated = bound.aggregated;

    // Broadcast-side hash index on the join key.
    std::map<Value, std::vector<std::size_t>> broadcast_index;
    std::size_t probe_key_local = 0;
    std::size_t broadcast_key_local = 0;
    if (bound.has_join) {
        if (bound.probe_is_from) {
            probe_key_local = bound.join_from_col;
            broadcast_key_local = bound.join_join_col - bound.from_width;
        } else {
            probe_key_local = bound.join_join_col - bound.from_width;
            broadcast_key_local = bound.join_from_col;
        }
        for (std::size_t r = 0; r < broadcast->rows.size(); ++r) {
            broadcast_index[broadcast->rows[r][broadcast_key_local]].push_back(r);
        }
    }

    std::map<std::vector<Value>, std::vector<AggState>, KeyLess> groups;

    auto emit = [&](const std::vector<Value>& logical) {
        if (!row_passes(bound.predicates, logical)) {
            return;
        }
        if (!bound.aggregated) {
            partial.rows.push_back(project_plain(bound, logical));
            return;
        }
        auto [it, inserted] =
            groups.try_emplace(group_key_of(bound, logical), bound.items.size());
        for (std::size_t i = 0; i < bound.items.size(); ++i) {
            const BoundItem& item = bound.items[i];
            if (item.count_star) {
                it->second[i].count += 1;
            } else if (item.fn != AggregateFn::none) {
                accumulate(it->second[i], item.fn, logical[item.col]);
            }
        }
    };

    for (std::size_t r = range.begin; r < range.end; ++r) {
        const std::vector<Value>& probe_row = probe.rows[r];
        if (!bound.has_join) {
            emit(probe_row);
            continue;
        }
        auto match = broadcast_index.find(probe_row[probe_key_local]);
        if (match == broadcast_index.end()) {
            continue;
        }
        for (std::size_t b : match->second) {
            const std::vector<Value>& bcast_row = broadcast->rows[b];
            std::vector<Value> logical;
            logical.reserve(bound.logical_columns.size());
            if (bound.probe_is_from) {
                logical.insert(logical.end(), probe_row.begin(), probe_row.end());
                logical.insert(logical.end(), bcast_row.begin(), bcast_row.end());
            } else {
                logical.insert(logical.end(), bcast_row.begin(), bcast_row.end());
                logical.insert(logical.end(), probe_row.begin(), probe_row.end());
            }
            emit(logical);
        }
    }

    for (auto& [key, states] : groups) {
        partial.groups.emplace_back(key, std::move(states));
    }

    for (std::size_t r = range.begin; r < range.end; ++r) {
        for (const Value& v : probe.rows[r]) {
            partial.bytes_processed += 4 + render_value(v).size();
        }
    }
    if (broadcast) {
        partial.bytes_processed += rows_byte_size(broadcast->rows);
    }
    return partial;
}

PartialResult worker_execute(const BoundSelect& bound, const Table& probe, RowRange range,
                             const Table* broadcast, std::uint32_t worker_index,
                             std::uint32_t worker_count, CacheRegistry& cache,
                             const Digest256& partition_id, const Digest256& broadcast_id) {
    cache.register_entry(partition_id, rows_byte_size(probe, range));
    if (broadcast) {
        cache.register_entry(broadcast_id, rows_byte_size(broadcast->rows));
    }
    return execute_fragment(bound, probe, range, broadcast, worker_index, worker_count);
}

QueryResult merge_partials(const BoundSelect& bound, std::vector<PartialResult> partials) {
    if (partials.empty()) {
        throw IncompleteError("no worker partials to merge");
    }
    const std::uint32_t expected = partials.front().worker_count;
    std::vector<bool> present(expected, false);
    for (const PartialResult& p : partials) {
        if (p.worker_count != expected || p.worker_index >= expected) {
            throw IncompleteError("inconsistent worker partials");
        }
        if (present[p.worker_index]) {
            throw IncompleteError("duplicate partial for worker " +
                                  std::to_string(p.worker_index));
        }
        present[p.worker_index] = true;
    }
    for (std::uint32_t w = 0; w < expected; ++w) {
        if (!present[w]) {
            throw IncompleteError("missing partial for worker " + std::to_string(w));
        }
    }
    std::sort(partials.begin(), partials.end(),
              [](const PartialResult& a, const PartialResult& b) {
                  return a.worker_index < b.worker_index;
              });

    QueryResult result;
    result.columns = bound.output_columns;

    if (bound.aggregated) {
        std::map<std::vector<Value>, std::vector<AggState>, KeyLess> combined;
        for (const PartialResult& p : partials) {
            for (const auto& [key, states] : p.groups) {
                auto [it, inserted] = combined.try_emplace(key, bound.items.size());
                for (std::size_t i = 0; i < bound.items.size(); ++i) {
                    merge_state(it->second[i], states[i]);
                }
            }
        }
        // A whole-table aggregate over zero rows still yields one row.
        if (bound.group_cols.empty() && combined.empty()) {
            combined.try_emplace(std::vector<Value>{}, bound.items.size());
        }
        for (const auto& [key, states] : combined) {
            std::vector<Value> row;
            row.reserve(bound.items.size());
            for (std::size_t i = 0; i < bound.items.size(); ++i) {
                const BoundItem& item = bound.items[i];
                if (item.fn == AggregateFn::none) {
                    // Value comes from the group key.
                    std::size_t key_pos = 0;
                    for (std::size_t g = 0; g < bound.group_cols.size(); ++g) {
                        if (bound.group_cols[g] == item.col) {
                            key_pos = g;
                            break;
                        }
                    }
                    row.push_back(key[key_pos]);
                } else {
                    row.push_back(finalize_item(item, states[i]));
                }
            }
            result.rows.push_back(std::move(row));
        }
    } else {
        for (const PartialResult& p : partials) {
            for (const auto& row : p.rows) {
                result.rows.push_back(row);
            }
        }
    }

    if (bound.order_output_col) {
        std::stable_sort(result.rows.begin(), result.rows.end(),
                         OutputRowLess{*bound.order_output_col, bound.order_ascending});
    }
    if (bound.limit && result.rows.size() > *bound.limit) {
        result.rows.resize(*bound.limit);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reference executor: an independent, direct evaluation used as the oracle.
// It shares only name resolution with the distributed path.
// ---------------------------------------------------------------------------

QueryResult reference_execute(const QueryAst& ast, const std::map<std::string, Table>& tables) {
    if (ast.kind != StatementKind::select) {
        throw ArgumentError("reference_execute handles SELECT statements");
    }
    const SelectStatement& stmt = *ast.select;

    auto table_it = tables.find(stmt.from_table);
    if (table_it == tables.end()) {
        throw NotFoundError("unknown table '" + stmt.from_table + "'");
    }
    const Table& from_table = table_it->second;
    const Table* join_table = nullptr;
    if (stmt.join) {
        auto join_it = tables.find(stmt.join->table);
        if (join_it == tables.end()) {
            throw NotFoundError("unknown table '" + stmt.join->table + "'");
        }
        join_table = &join_it->second;
    }

    TableInfo from_info{from_table.name, from_table.columns, from_table.rows.size()};
    std::optional<TableInfo> join_info;
    if (join_table) {
        join_info = TableInfo{join_table->name, join_table->columns, join_table->rows.size()};
    }
    BoundSelect bound = bind_select(stmt, from_info, join_info);

    // Materialize every logical row by plain nested loops.
    std::vector<std::vector<Value>> logical_rows;
    if (join_table) {
        for (const auto& left : from_table.rows) {
            for (const auto& right : join_table->rows) {
                if (value_equal(left[bound.join_from_col],
                                right[bound.join_join_col - bound.from_width])) {
                    std::vector<Value> row = left;
                    row.insert(row.end(), right.begin(), right.end());
                    logical_rows.push_back(std::move(row));
                }
            }
        }
    } else {
        logical_rows = from_table.rows;
    }

    std::vector<std::vector<Value>> filtered;
    for (const auto& row : logical_rows) {
        if (row_passes(bound.predicates, row)) {
            filtered.push_back(row);
        }
    }

    QueryResult result;
    result.columns = bound.output_columns;

    if (bound.aggregated) {
        struct RefAgg {
            long long sum = 0;
            long long count = 0;
            std::optional<Value> min_v;
            std::optional<Value> max_v;
        };
        std::map<std::vector<Value>, std::vector<RefAgg>, KeyLess> groups;
        for (const auto& row : filtered) {
            std::vector<Value> key;
            for (std::size_t col : bound.group_cols) {
                key.push_back(row[col]);
            }
            auto [it, inserted] = groups.try_emplace(key, bound.items.size());
            for (std::size_t i = 0; i < bound.items.size(); ++i) {
                const BoundItem& item = bound.items[i];
                RefAgg& acc = it->second[i];
                if (item.count_star || item.fn == AggregateFn::count) {
                    acc.count += 1;
                    continue;
                }
                if (item.fn == AggregateFn::none) {
                    continue;
                }
                const Value& v = row[item.col];
                switch (item.fn) {
                    case AggregateFn::sum:
                    case AggregateFn::avg:
                        acc.sum += scaled_numeric(v);
                        acc.count += 1;
                        break;
                    case AggregateFn::min:
                        if (!acc.min_v || value_less(v, *acc.min_v)) {
                            acc.min_v = v;
                        }
                        break;
                    case AggregateFn::max:
                        if (!acc.max_v || value_less(*acc.max_v, v)) {
                            acc.max_v = v;
                        }
                        break;
                    default:
                        break;
                }
            }
        }
        if (bound.group_cols.empty() && groups.empty()) {
            groups.try_emplace(std::vector<Value>{}, bound.items.size());
        }
        for (const auto& [key, accs] : groups) {
            std::vector<Value> row;
            for (std::size_t i = 0; i < bound.items.size(); ++i) {
                const BoundItem& item = bound.items[i];
                const RefAgg& acc = accs[i];
                switch (item.fn) {
                    case AggregateFn::none: {
                        std::size_t key_pos = 0;
                        for (std::size_t g = 0; g < bound.group_cols.size(); ++g) {
                            if (bound.group_cols[g] == item.col) {
                                key_pos = g;
                                break;
                            }
                        }
                        row.push_back(key[key_pos]);
                        break;
                    }
                    case AggregateFn::count:
                        row.push_back(static_cast<std::int64_t>(acc.count));
                        break;
                    case AggregateFn::sum:
                        if (item.col_type == ColumnType::integer) {
                            row.push_back(static_cast<std::int64_t>(acc.sum));
                        } else {
                            row.push_back(Decimal::from_scaled(acc.sum));
                        }
                        break;
                    case AggregateFn::avg: {
                        if (acc.count == 0) {
                            throw Error("avg over empty input");
                        }
                        __int128 numerator = item.col_type == ColumnType::integer
                                                 ? static_cast<__int128>(acc.sum) * 10000
                                                 : static_cast<__int128>(acc.sum);
                        __int128 half = acc.count / 2;
                        __int128 q = numerator >= 0 ? (numerator + half) / acc.count
                                                    : (numerator - half) / acc.count;
                        row.push_back(Decimal::from_scaled(static_cast<long long>(q)));
                        break;
                    }
                    case AggregateFn::min:
                        if (!acc.min_v) {
                            throw Error("min over empty input");
                        }
                        row.push_back(*acc.min_v);
                        break;
                    case AggregateFn::max:
                        if (!acc.max_v) {
                            throw Error("max over empty input");
                        }
                        row.push_back(*acc.max_v);
                        break;
                }
            }
            result.rows.push_back(std::move(row));
        }
    } else {
        for (const auto& row : filtered) {
            std::vector<Value> projected;
            for (const BoundItem& item : bound.items) {
                projected.push_back(row[item.col]);
            }
            result.rows.push_back(std::move(projected));
        }
    }

    if (bound.order_output_col) {
        std::stable_sort(result.rows.begin(), result.rows.end(),
                         OutputRowLess{*bound.order_output_col, bound.order_ascending});
    }
    if (bound.limit && result.rows.size() > *bound.limit) {
        result.rows.resize(*bound.limit);
    }
    return result;
}

std::string QueryResult::to_csv() const {
    std::ostringstream out;
    auto escape = [](const std::string& field) {
        if (field.find_first_of(",\"\r\n") == std::string::npos) {
            return field;
        }
        std::string quoted = "\"";
        for (char c : field) {
            if (c == '"') {
                quoted += "\"\"";
            } else {
                quoted += c;
            }
        }
        quoted += "\"";
        return quoted;
    };
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << escape(columns[i].name);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out << ',';
            }
            out << escape(render_value(row[i]));
        }
        out << '\n';
    }
    return out.str();
}

std::string QueryResult::to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (std::holds_alternative<std::int64_t>(row[i])) {
                obj[columns[i].name] = std::get<std::int64_t>(row[i]);
            } else {
                obj[columns[i].name] = render_value(row[i]);
            }
        }
        out.push_back(obj);
    }
    return out.dump();
}

Bytes QueryResult::canonical_bytes() const {
    Bytes out;
    append_str(out, "w3db-result");
    append_u32_be(out, static_cast<std::uint32_t>(columns.size()));
    for (const Column& col : columns) {
        append_u32_be(out, static_cast<std::uint32_t>(col.name.size()));
        append_str(out, col.name);
        append_u32_be(out, static_cast<std::uint32_t>(column_type_name(col.type).size()));
        append_str(out, column_type_name(col.type));
    }
    append_u32_be(out, static_cast<std::uint32_t>(rows.size()));
    for (const auto& row : rows) {
        for (const Value& v : row) {
            std::string text = render_value(v);
            append_u32_be(out, static_cast<std::uint32_t>(text.size()));
            append_str(out, text);
        }
    }
    return out;
}

}  // namespace web3db::engine
