#ifndef WEB3DB_TESTS_SUPPORT_CORPUS_HPP
#define WEB3DB_TESTS_SUPPORT_CORPUS_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "support/stats.hpp"
#include "web3db/engine/execute.hpp"
#include "web3db/engine/parser.hpp"
#include "web3db/engine/plan.hpp"
#include "web3db/table.hpp"

namespace test_support {

// Randomized fixture pair: a larger fact table and a small dimension table
// sharing the `grp` key.
inline web3db::Table make_orders(Rng& rng, std::size_t rows) {
    using namespace web3db;
    Table t;
    t.name = "orders";
    t.columns = {{"id", ColumnType::integer},    {"grp", ColumnType::integer},
                 {"qty", ColumnType::integer},   {"price", ColumnType::decimal},
                 {"label", ColumnType::text},    {"shipped", ColumnType::date}};
    static const char* labels[] = {"alpha", "beta", "gamma", "delta"};
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<Value> row;
        row.push_back(static_cast<std::int64_t>(i));
        row.push_back(static_cast<std::int64_t>(rng.next_below(5)));
        row.push_back(static_cast<std::int64_t>(rng.next_below(1001)) - 500);
        row.push_back(Decimal::from_scaled(static_cast<std::int64_t>(rng.next_below(400000)) -
                                           100000));
        row.push_back(std::string(labels[rng.next_below(4)]));
        Date d;
        d.year = static_cast<std::int32_t>(2021 + rng.next_below(5));
        d.month = static_cast<std::uint8_t>(1 + rng.next_below(12));
        d.day = static_cast<std::uint8_t>(1 + rng.next_below(28));
        row.push_back(d);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline web3db::Table make_refs(Rng& rng, std::size_t rows) {
    using namespace web3db;
    Table t;
    t.name = "refs";
    t.columns = {{"grp", ColumnType::integer},
                 {"name", ColumnType::text},
                 {"bonus", ColumnType::decimal}};
    static const char* names[] = {"north", "south", "east", "west"};
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<Value> row;
        row.push_back(static_cast<std::int64_t>(i % 5));
        row.push_back(std::string(names[rng.next_below(4)]));
        row.push_back(Decimal::from_scaled(static_cast<std::int64_t>(rng.next_below(30000))));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// 30 queries covering scans, filters, equi-joins, group-aggregates, and
// order/limit over the fixture pair.
inline std::vector<std::string> query_corpus() {
    return {
        "SELECT * FROM orders",
        "SELECT id, qty FROM orders",
        "SELECT * FROM orders WHERE qty > 100",
        "SELECT id FROM orders WHERE qty <= 0 ORDER BY id ASC",
        "SELECT * FROM orders WHERE label = 'alpha'",
        "SELECT id, price FROM orders WHERE price >= 12.5 ORDER BY price DESC LIMIT 10",
        "SELECT * FROM orders WHERE shipped > '2023-06-15'",
        "SELECT * FROM orders WHERE qty > -100 AND qty < 100 AND grp = 2",
        "SELECT COUNT(*) FROM orders",
        "SELECT COUNT(qty) FROM orders WHERE qty <> 0",
        "SELECT SUM(qty) FROM orders",
        "SELECT SUM(price) FROM orders WHERE grp = 1",
        "SELECT MIN(qty), MAX(qty) FROM orders",
        "SELECT AVG(qty) FROM orders",
        "SELECT AVG(price) FROM orders WHERE qty > 0",
        "SELECT MIN(shipped), MAX(shipped) FROM orders",
        "SELECT grp, COUNT(*) FROM orders GROUP BY grp ORDER BY grp ASC",
        "SELECT grp, SUM(qty) FROM orders GROUP BY grp ORDER BY grp ASC",
        "SELECT grp, AVG(price) FROM orders GROUP BY grp ORDER BY grp DESC",
        "SELECT grp, MIN(qty), MAX(qty), COUNT(*) FROM orders GROUP BY grp ORDER BY grp ASC",
        "SELECT label, COUNT(*) FROM orders GROUP BY label ORDER BY count(*) DESC LIMIT 3",
        "SELECT grp, SUM(qty) FROM orders WHERE qty > 0 GROUP BY grp ORDER BY sum(qty) DESC",
        "SELECT * FROM orders JOIN refs ON orders.grp = refs.grp WHERE orders.qty > 200",
        "SELECT orders.id, refs.name FROM orders JOIN refs ON orders.grp = refs.grp "
        "ORDER BY orders.id ASC LIMIT 20",
        "SELECT refs.name, COUNT(*) FROM orders JOIN refs ON orders.grp = refs.grp "
        "GROUP BY refs.name ORDER BY refs.name ASC",
        "SELECT refs.name, SUM(orders.qty) FROM orders JOIN refs ON orders.grp = refs.grp "
        "GROUP BY refs.name ORDER BY sum(orders.qty) ASC",
        "SELECT orders.id, orders.qty, refs.bonus FROM orders JOIN refs ON orders.grp = refs.grp "
        "WHERE refs.bonus > 1.0 ORDER BY orders.id DESC LIMIT 15",
        "SELECT grp, COUNT(*), AVG(qty) FROM orders WHERE shipped >= '2022-01-01' "
        "GROUP BY grp ORDER BY grp ASC",
        "SELECT id, label FROM orders WHERE label <> 'beta' ORDER BY id DESC LIMIT 25",
        "SELECT AVG(bonus) FROM refs",
    };
}

// Runs the full distributed path: plan, per-worker fragments, merge.
inline web3db::engine::QueryResult run_distributed(
    const web3db::engine::QueryAst& ast, const std::map<std::string, web3db::Table>& tables,
    std::uint32_t worker_count) {
    using namespace web3db;
    using namespace web3db::engine;
    const SelectStatement& stmt = *ast.select;
    const Table& from = tables.at(stmt.from_table);
    const Table* join = stmt.join ? &tables.at(stmt.join->table) : nullptr;
    TableInfo from_info{from.name, from.columns, from.rows.size()};
    std::optional<TableInfo> join_info;
    if (join) {
        join_info = TableInfo{join->name, join->columns, join->rows.size()};
    }
    ExecutionPlan p = plan(stmt, from_info, join_info, worker_count);
    const Table& probe = p.bound.probe_is_from ? from : *join;
    const Table* broadcast = p.bound.has_join ? (p.bound.probe_is_from ? join : &from) : nullptr;
    std::vector<PartialResult> partials;
    for (std::uint32_t w = 0; w < worker_count; ++w) {
        partials.push_back(
            execute_fragment(p.bound, probe, p.partitions[w], broadcast, w, worker_count));
    }
    return merge_partials(p.bound, std::move(partials));
}

inline std::vector<std::vector<web3db::Value>> sorted_rows(
    const web3db::engine::QueryResult& result) {
    auto rows = result.rows;
    std::sort(rows.begin(), rows.end());
    return rows;
}

// Multiset comparison; sequence comparison when the query carries ORDER BY.
inline bool results_match(const web3db::engine::QueryResult& got,
                          const web3db::engine::QueryResult& expected, bool ordered) {
    if (got.columns != expected.columns) {
        return false;
    }
    if (ordered) {
        return got.rows == expected.rows;
    }
    return sorted_rows(got) == sorted_rows(expected);
}

}  // namespace test_support

#endif
