#ifndef WEB3DB_ENGINE_AST_HPP
#define WEB3DB_ENGINE_AST_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "web3db/table.hpp"

namespace web3db::engine {

enum class StatementKind { create_table, insert, select };
enum class CompareOp { eq, lt, gt, le, ge, ne };
enum class AggregateFn { none, sum, count, min, max, avg };

std::string compare_op_symbol(CompareOp op);
std::string aggregate_fn_name(AggregateFn fn);

struct ColumnRef {
    std::string table;  // optional qualifier
    std::string column;

    bool operator==(const ColumnRef&) const = default;
    std::string display() const { return table.empty() ? column : table + "." + column; }
};

struct Literal {
    std::string text;
    bool quoted = false;

    bool operator==(const Literal&) const = default;
};

struct SelectItem {
    AggregateFn aggregate = AggregateFn::none;
    bool count_star = false;
    ColumnRef column;  // unused for COUNT(*)

    bool operator==(const SelectItem&) const = default;
    std::string display() const;  // canonical result column name
};

struct Predicate {
    ColumnRef column;
    CompareOp op;
    Literal literal;

    bool operator==(const Predicate&) const = default;
};

struct JoinClause {
    std::string table;
    ColumnRef left;
    ColumnRef right;

    bool operator==(const JoinClause&) const = default;
};

struct OrderBy {
    SelectItem item;  // matched against result columns by display name
    bool ascending = true;

    bool operator==(const OrderBy&) const = default;
};

struct SelectStatement {
    bool select_star = false;
    std::vector<SelectItem> items;
    std::string from_table;
    std::optional<JoinClause> join;
    std::vector<Predicate> where;  // conjunctive
    std::vector<ColumnRef> group_by;
    std::optional<OrderBy> order_by;
    std::optional<std::uint64_t> limit;

    bool operator==(const SelectStatement&) const = default;
};

struct CreateTableStatement {
    std::string table;
    std::vector<Column> columns;

    bool operator==(const CreateTableStatement&) const = default;
};

struct InsertStatement {
    std::string table;
    std::vector<std::vector<Literal>> rows;

    bool operator==(const InsertStatement&) const = default;
};

struct QueryAst {
    StatementKind kind = StatementKind::select;
    std::optional<CreateTableStatement> create;
    std::optional<InsertStatement> insert;
    std::optional<SelectStatement> select;

    bool operator==(const QueryAst&) const = default;
    std::vector<std::string> referenced_tables() const;
};

// Canonical SQL rendering; parse(to_sql(ast)) reproduces the ast.
std::string to_sql(const QueryAst& ast);

}  // namespace web3db::engine

#endif
