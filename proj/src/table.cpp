#include "web3db/table.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace web3db {

std::string column_type_name(ColumnType type) {
    switch (type) {
        case ColumnType::integer: return "integer";
        case ColumnType::decimal: return "decimal";
        case ColumnType::text: return "text";
        case ColumnType::date: return "date";
    }
    throw ArgumentError("unknown column type");
}

ColumnType column_type_from_name(const std::string& name) {
    if (name == "integer") return ColumnType::integer;
    if (name == "decimal") return ColumnType::decimal;
    if (name == "text") return ColumnType::text;
    if (name == "date") return ColumnType::date;
    throw ArgumentError("unknown column type name: " + name);
}

namespace {

std::int64_t parse_int64(const std::string& text) {
    std::int64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ArgumentError("invalid integer literal: '" + text + "'");
    }
    return value;
}

}  // namespace

Decimal Decimal::parse(const std::string& text) {
    if (text.empty()) {
        throw ArgumentError("empty decimal literal");
    }
    std::size_t dot = text.find('.');
    bool negative = text[0] == '-';
    std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (frac.size() > 4) {
        throw ArgumentError("decimal supports at most 4 fractional digits: '" + text + "'");
    }
    if (whole.empty() || whole == "-") {
        throw ArgumentError("invalid decimal literal: '" + text + "'");
    }
    std::int64_t whole_part = parse_int64(whole);
    std::int64_t frac_part = 0;
    if (!frac.empty()) {
        for (char c : frac) {
            if (c < '0' || c > '9') {
                throw ArgumentError("invalid decimal literal: '" + text + "'");
            }
        }
        frac_part = parse_int64(frac);
        for (std::size_t i = frac.size(); i < 4; ++i) {
            frac_part *= 10;
        }
    }
    std::int64_t scaled = whole_part * 10000;
    scaled += negative ? -frac_part : frac_part;
    return Decimal{scaled};
}

std::string Decimal::to_string() const {
    std::int64_t v = scaled;
    std::string sign;
    if (v < 0) {
        sign = "-";
        v = -v;
    }
    std::ostringstream out;
    out << sign << (v / 10000) << '.';
    std::string frac = std::to_string(v % 10000);
    out << std::string(4 - frac.size(), '0') << frac;
    return out.str();
}

namespace {

bool leap_year(std::int32_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(std::int32_t y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) {
        return 29;
    }
    return lengths[m - 1];
}

}  // namespace

Date Date::parse(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw ArgumentError("date must be YYYY-MM-DD: '" + iso + "'");
    }
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (iso[i] < '0' || iso[i] > '9') {
            throw ArgumentError("date must be YYYY-MM-DD: '" + iso + "'");
        }
    }
    Date d;
    d.year = static_cast<std::int32_t>(parse_int64(iso.substr(0, 4)));
    int month = static_cast<int>(parse_int64(iso.substr(5, 2)));
    int day = static_cast<int>(parse_int64(iso.substr(8, 2)));
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(d.year, month)) {
        throw ArgumentError("invalid calendar date: '" + iso + "'");
    }
    d.month = static_cast<std::uint8_t>(month);
    d.day = static_cast<std::uint8_t>(day);
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, static_cast<unsigned>(month),
                  static_cast<unsigned>(day));
    return buf;
}

ColumnType value_type(const Value& v) {
    switch (v.index()) {
        case 0: return ColumnType::integer;
        case 1: return ColumnType::decimal;
        case 2: return ColumnType::text;
        case 3: return ColumnType::date;
    }
    throw ArgumentError("valueless value");
}

std::string render_value(const Value& v) {
    switch (v.index()) {
        case 0: return std::to_string(std::get<std::int64_t>(v));
        case 1: return std::get<Decimal>(v).to_string();
        case 2: return std::get<std::string>(v);
        case 3: return std::get<Date>(v).to_string();
    }
    throw ArgumentError("valueless value");
}

Value parse_value(ColumnType type, const std::string& text) {
    switch (type) {
        case ColumnType::integer: return parse_int64(text);
        case ColumnType::decimal: return Decimal::parse(text);
        case ColumnType::text: return text;
        case ColumnType::date: return Date::parse(text);
    }
    throw ArgumentError("unknown column type");
}

bool value_less(const Value& a, const Value& b) {
    if (a.index() != b.index()) {
        throw ArgumentError("cannot compare values of different types");
    }
    return a < b;
}

bool value_equal(const Value& a, const Value& b) {
    return a.index() == b.index() && a == b;
}

void Table::validate() const {
    for (const auto& row : rows) {
        if (row.size() != columns.size()) {
            throw ArgumentError("table '" + name + "': row arity " + std::to_string(row.size()) +
                                " != schema arity " + std::to_string(columns.size()));
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (value_type(row[i]) != columns[i].type) {
                throw ArgumentError("table '" + name + "': column '" + columns[i].name +
                                    "' holds a " + column_type_name(value_type(row[i])) +
                                    " but is declared " + column_type_name(columns[i].type));
            }
        }
    }
}

std::size_t Table::column_index(const std::string& column_name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == column_name) {
            return i;
        }
    }
    throw NotFoundError("table '" + name + "' has no column '" + column_name + "'");
}

namespace {

// RFC 4180 field quoting.
std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
        ++i;
    }
    if (quoted) {
        throw ArgumentError("csv line " + std::to_string(line_no) + ": unterminated quote");
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace

Table table_from_csv(const std::string& table_name, const std::string& csv) {
    std::vector<std::string> lines;
    std::string current;
    bool quoted = false;
    for (char c : csv) {
        if (c == '"') {
            quoted = !quoted;
            current += c;
        } else if (c == '\n' && !quoted) {
            if (!current.empty() && current.back() == '\r') {
                current.pop_back();
            }
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) {
        if (current.back() == '\r') {
            current.pop_back();
        }
        lines.push_back(std::move(current));
    }
    if (lines.empty()) {
        throw ArgumentError("csv needs a header row");
    }

    Table table;
    table.name = table_name;
    for (const std::string& header : csv_split_line(lines[0], 1)) {
        std::size_t colon = header.rfind(':');
        if (colon == std::string::npos) {
            throw ArgumentError("csv header field '" + header + "' must be name:type");
        }
        table.columns.push_back(
            Column{header.substr(0, colon), column_type_from_name(header.substr(colon + 1))});
    }
    for (std::size_t n = 1; n < lines.size(); ++n) {
        auto fields = csv_split_line(lines[n], n + 1);
        if (fields.size() != table.columns.size()) {
            throw ArgumentError("csv line " + std::to_string(n + 1) + ": expected " +
                                std::to_string(table.columns.size()) + " fields, got " +
                                std::to_string(fields.size()));
        }
        std::vector<Value> row;
        row.reserve(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            row.push_back(parse_value(table.columns[i].type, fields[i]));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string table_to_csv(const Table& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << csv_escape(table.columns[i].name + ":" + column_type_name(table.columns[i].type));
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out << ',';
            }
            out << csv_escape(render_value(row[i]));
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace web3db
