#ifndef WEB3DB_TESTS_SUPPORT_FIXTURES_HPP
#define WEB3DB_TESTS_SUPPORT_FIXTURES_HPP

#include <string>
#include <vector>

#include "support/stats.hpp"
#include "web3db/table.hpp"

namespace test_support {

inline web3db::Table random_table(Rng& rng, const std::string& name, std::size_t rows) {
    using namespace web3db;
    Table t;
    t.name = name;
    t.columns = {
        {"id", ColumnType::integer},   {"grp", ColumnType::integer},
        {"qty", ColumnType::integer},  {"price", ColumnType::decimal},
        {"label", ColumnType::text},   {"shipped", ColumnType::date},
    };
    static const char* labels[] = {"alpha", "beta", "gamma", "delta", "epsilon, quoted",
                                   "zeta \"q\""};
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<Value> row;
        row.push_back(static_cast<std::int64_t>(i));
        row.push_back(static_cast<std::int64_t>(rng.next_below(5)));
        row.push_back(static_cast<std::int64_t>(rng.next_below(1000)) - 500);
        row.push_back(Decimal::from_scaled(static_cast<std::int64_t>(rng.next_below(2000000)) -
                                           1000000));
        row.push_back(std::string(labels[rng.next_below(6)]));
        Date d;
        d.year = static_cast<std::int32_t>(2020 + rng.next_below(6));
        d.month = static_cast<std::uint8_t>(1 + rng.next_below(12));
        d.day = static_cast<std::uint8_t>(1 + rng.next_below(28));
        row.push_back(d);
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace test_support

#endif
