#ifndef WEB3DB_TABLE_HPP
#define WEB3DB_TABLE_HPP

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "web3db/common.hpp"

namespace web3db {

enum class ColumnType { integer, decimal, text, date };

std::string column_type_name(ColumnType type);
ColumnType column_type_from_name(const std::string& name);

// Fixed-point decimal with 4 fractional digits; arithmetic stays exact so
// results are identical across any partitioning of the input.
struct Decimal {
    std::int64_t scaled = 0;  // value * 10^4

    auto operator<=>(const Decimal&) const = default;

    static Decimal parse(const std::string& text);
    static Decimal from_scaled(std::int64_t scaled) { return Decimal{scaled}; }
    std::string to_string() const;
};

struct Date {
    std::int32_t year = 1970;
    std::uint8_t month = 1;
    std::uint8_t day = 1;

    auto operator<=>(const Date&) const = default;

    static Date parse(const std::string& iso);  // strict YYYY-MM-DD
    std::string to_string() const;
};

using Value = std::variant<std::int64_t, Decimal, std::string, Date>;

ColumnType value_type(const Value& v);
std::string render_value(const Value& v);  // canonical text form
Value parse_value(ColumnType type, const std::string& text);
bool value_less(const Value& a, const Value& b);   // same-type only
bool value_equal(const Value& a, const Value& b);  // false across types

struct Column {
    std::string name;
    ColumnType type;

    bool operator==(const Column&) const = default;
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::vector<Value>> rows;

    bool operator==(const Table&) const = default;

    // Arity and type check on every row; throws ArgumentError.
    void validate() const;
    std::size_t column_index(const std::string& column_name) const;  // NotFoundError
};

// CSV with a `name:type` header row and RFC 4180 quoting.
Table table_from_csv(const std::string& table_name, const std::string& csv);
std::string table_to_csv(const Table& table);

}  // namespace web3db

#endif
