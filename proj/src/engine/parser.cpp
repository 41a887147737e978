#include "web3db/engine/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace web3db::engine {

std::string compare_op_symbol(CompareOp op) {
    switch (op) {
        case CompareOp::eq: return "=";
        case CompareOp::lt: return "<";
        case CompareOp::gt: return ">";
        case CompareOp::le: return "<=";
        case CompareOp::ge: return ">=";
        case CompareOp::ne: return "<>";
    }
    throw ArgumentError("unknown compare op");
}

std::string aggregate_fn_name(AggregateFn fn) {
    switch (fn) {
        case AggregateFn::none: return "";
        case AggregateFn::sum: return "sum";
        case AggregateFn::count: return "count";
        case AggregateFn::min: return "min";
        case AggregateFn::max: return "max";
        case AggregateFn::avg: return "avg";
    }
    throw ArgumentError("unknown aggregate");
}

std::string SelectItem::display() const {
    if (count_star) {
        return "count(*)";
    }
    if (aggregate == AggregateFn::none) {
        return column.display();
    }
    return aggregate_fn_name(aggregate) + "(" + column.display() + ")";
}

std::vector<std::string> QueryAst::referenced_tables() const {
    switch (kind) {
        case StatementKind::create_table:
            return {};  // creates a new table, nothing referenced yet
        case StatementKind::insert:
            return {insert->table};
        case StatementKind::select: {
            std::vector<std::string> out{select->from_table};
            if (select->join) {
                out.push_back(select->join->table);
            }
            return out;
        }
    }
    return {};
}

namespace {

enum class TokenKind { identifier, integer, decimal, string, symbol, end };

struct Token {
    TokenKind kind = TokenKind::end;
    std::string text;       // identifier/literal text or symbol
    std::string upper;      // uppercase identifier for keyword matching
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& sql) : sql_(sql) { tokenize(); }

    const std::vector<Token>& tokens() const { return tokens_; }

private:
    void tokenize() {
        std::size_t i = 0;
        std::size_t line = 1;
        std::size_t col = 1;
        auto advance = [&](std::size_t n) {
            for (std::size_t k = 0; k < n; ++k) {
                if (sql_[i + k] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            i += n;
        };
        while (i < sql_.size()) {
            char c = sql_[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
                continue;
            }
            Token tok;
            tok.line = line;
            tok.column = col;
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t len = 1;
                while (i + len < sql_.size() &&
                       (std::isalnum(static_cast<unsigned char>(sql_[i + len])) ||
                        sql_[i + len] == '_')) {
                    ++len;
                }
                tok.kind = TokenKind::identifier;
                tok.text = sql_.substr(i, len);
                tok.upper = tok.text;
                std::transform(tok.upper.begin(), tok.upper.end(), tok.upper.begin(),
                               [](unsigned char ch) { return std::toupper(ch); });
                advance(len);
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && i + 1 < sql_.size() &&
                        std::isdigit(static_cast<unsigned char>(sql_[i + 1])))) {
                std::size_t len = c == '-' ? 2 : 1;
                bool dotted = false;
                while (i + len < sql_.size()) {
                    char d = sql_[i + len];
                    if (std::isdigit(static_cast<unsigned char>(d))) {
                        ++len;
                    } else if (d == '.' && !dotted) {
                        dotted = true;
                        ++len;
                    } else {
                        break;
                    }
                }
                tok.kind = dotted ? TokenKind::decimal : TokenKind::integer;
                tok.text = sql_.substr(i, len);
                advance(len);
            } else if (c == '\'') {
                std::string value;
                std::size_t len = 1;
                bool closed = false;
                while (i + len < sql_.size()) {
                    char d = sql_[i + len];
                    if (d == '\'') {
                        if (i + len + 1 < sql_.size() && sql_[i + len + 1] == '\'') {
                            value += '\'';
                            len += 2;
                        } else {
                            ++len;
                            closed = true;
                            break;
                        }
                    } else {
                        value += d;
                        ++len;
                    }
                }
                if (!closed) {
                    throw ParseError("unterminated string literal", line, col);
                }
                tok.kind = TokenKind::string;
                tok.text = value;
                advance(len);
            } else if (c == '<' && i + 1 < sql_.size() && (sql_[i + 1] == '=' || sql_[i + 1] == '>')) {
                tok.kind = TokenKind::symbol;
                tok.text = sql_.substr(i, 2);
                advance(2);
            } else if (c == '>' && i + 1 < sql_.size() && sql_[i + 1] == '=') {
                tok.kind = TokenKind::symbol;
                tok.text = ">=";
                advance(2);
            } else if (std::string("(),.*=<>;").find(c) != std::string::npos) {
                tok.kind = TokenKind::symbol;
                tok.text = std::string(1, c);
                advance(1);
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
            }
            tokens_.push_back(std::move(tok));
        }
        Token end;
        end.kind = TokenKind::end;
        end.line = line;
        end.column = col;
        tokens_.push_back(end);
    }

    const std::string& sql_;
    std::vector<Token> tokens_;
};

// Real SQL constructs outside the supported subset get a distinct error
// naming the construct.
const char* kUnsupported[] = {"OR",     "HAVING", "DISTINCT", "LEFT",  "RIGHT",
                              "OUTER",  "FULL",   "CROSS",    "UNION", "UPDATE",
                              "DELETE", "DROP",   "IN",       "NOT",   "LIKE",
                              "BETWEEN", "EXISTS", "ALTER",   "AS"};

class Parser {
public:
    explicit Parser(const std::string& sql) : lexer_(sql) {}

    QueryAst parse_statement() {
        const Token& first = peek();
        if (first.kind != TokenKind::identifier) {
            throw ParseError("expected a statement keyword", first.line, first.column);
        }
        QueryAst ast;
        if (first.upper == "CREATE") {
            ast.kind = StatementKind::create_table;
            ast.create = parse_create();
        } else if (first.upper == "INSERT") {
            ast.kind = StatementKind::insert;
            ast.insert = parse_insert();
        } else if (first.upper == "SELECT") {
            ast.kind = StatementKind::select;
            ast.select = parse_select();
        } else {
            reject_unsupported(first);
            throw ParseError("expected CREATE, INSERT, or SELECT, got '" + first.text + "'",
                             first.line, first.column);
        }
        if (peek().kind == TokenKind::symbol && peek().text == ";") {
            consume();
        }
        const Token& rest = peek();
        if (rest.kind != TokenKind::end) {
            if (rest.kind == TokenKind::identifier) {
                reject_unsupported(rest);
            }
            throw ParseError("unexpected trailing input '" + rest.text + "'", rest.line,
                             rest.column);
        }
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t index = std::min(pos_ + ahead, lexer_.tokens().size() - 1);
        return lexer_.tokens()[index];
    }

    const Token& consume() { return lexer_.tokens()[pos_++]; }

    void reject_unsupported(const Token& tok) const {
        for (const char* word : kUnsupported) {
            if (tok.upper == word) {
                throw UnsupportedFeatureError(word, tok.line, tok.column);
            }
        }
        if (tok.upper == "SELECT") {
            throw UnsupportedFeatureError("nested SELECT", tok.line, tok.column);
        }
    }

    const Token& expect_symbol(const std::string& symbol) {
        const Token& tok = peek();
        if (tok.kind != TokenKind::symbol || tok.text != symbol) {
            throw ParseError("expected '" + symbol + "', got '" + tok.text + "'", tok.line,
                             tok.column);
        }
        return consume();
    }

    const Token& expect_keyword(const std::string& keyword) {
        const Token& tok = peek();
        if (tok.kind != TokenKind::identifier || tok.upper != keyword) {
            throw ParseError("expected " + keyword + ", got '" + tok.text + "'", tok.line,
                             tok.column);
        }
        return consume();
    }

    bool accept_keyword(const std::string& keyword) {
        const Token& tok = peek();
        if (tok.kind == TokenKind::identifier && tok.upper == keyword) {
            consume();
            return true;
        }
        return false;
    }

    static bool is_reserved(const Token& tok) {
        static const char* words[] = {"SELECT", "FROM",  "WHERE", "GROUP", "ORDER", "LIMIT",
                                      "JOIN",   "INNER", "ON",    "AND",   "BY",    "CREATE",
                                      "TABLE",  "INSERT", "INTO", "VALUES", "ASC",  "DESC"};
        for (const char* word : words) {
            if (tok.upper == word) {
                return true;
            }
        }
        return false;
    }

    std::string expect_identifier(const std::string& what) {
        const Token& tok = peek();
        if (tok.kind != TokenKind::identifier) {
            throw ParseError("expected " + what + ", got '" + tok.text + "'", tok.line,
                             tok.column);
        }
        reject_unsupported(tok);
        if (is_reserved(tok)) {
            throw ParseError("expected " + what + ", got keyword '" + tok.text + "'", tok.line,
                             tok.column);
        }
        return consume().text;
    }

    CreateTableStatement parse_create() {
        expect_keyword("CREATE");
        expect_keyword("TABLE");
        CreateTableStatement stmt;
        stmt.table = expect_identifier("table name");
        expect_symbol("(");
        while (true) {
            Column col;
            col.name = expect_identifier("column name");
            const Token& type_tok = peek();
            std::string type = expect_identifier("column type");
            std::transform(type.begin(), type.end(), type.begin(),
                           [](unsigned char ch) { return std::tolower(ch); });
            try {
                col.type = column_type_from_name(type);
            } catch (const ArgumentError&) {
                throw ParseError("unknown column type '" + type + "'", type_tok.line,
                                 type_tok.column);
            }
            stmt.columns.push_back(col);
            if (peek().text == ",") {
                consume();
                continue;
            }
            break;
        }
        expect_symbol(")");
        if (stmt.columns.empty()) {
            throw ParseError("table needs at least one column", peek().line, peek().column);
        }
        return stmt;
    }

    Literal parse_literal() {
        const Token& tok = peek();
        if (tok.kind == TokenKind::symbol && tok.text == "(" &&
            peek(1).kind == TokenKind::identifier && peek(1).upper == "SELECT") {
            throw UnsupportedFeatureError("subquery", tok.line, tok.column);
        }
        Literal lit;
        switch (tok.kind) {
            case TokenKind::integer:
            case TokenKind::decimal:
                lit.text = consume().text;
                return lit;
            case TokenKind::string:
                lit.text = consume().text;
                lit.quoted = true;
                return lit;
            default:
                if (tok.kind == TokenKind::identifier) {
                    reject_unsupported(tok);
                }
                throw ParseError("expected a literal, got '" + tok.text + "'", tok.line,
                                 tok.column);
        }
    }

    InsertStatement parse_insert() {
        expect_keyword("INSERT");
        expect_keyword("INTO");
        InsertStatement stmt;
        stmt.table = expect_identifier("table name");
        expect_keyword("VALUES");
        while (true) {
            expect_symbol("(");
            std::vector<Literal> row;
            while (true) {
                row.push_back(parse_literal());
                if (peek().text == ",") {
                    consume();
                    continue;
                }
                break;
            }
            expect_symbol(")");
            stmt.rows.push_back(std::move(row));
            if (peek().text == ",") {
                consume();
                continue;
            }
            break;
        }
        return stmt;
    }

    ColumnRef parse_column_ref() {
        ColumnRef ref;
        std::string first = expect_identifier("column name");
        if (peek().kind == TokenKind::symbol && peek().text == ".") {
            consume();
            ref.table = first;
            ref.column = expect_identifier("column name");
        } else {
            ref.column = first;
        }
        return ref;
    }

    SelectItem parse_select_item() {
        const Token& tok = peek();
        SelectItem item;
        if (tok.kind == TokenKind::identifier) {
            static const std::pair<const char*, AggregateFn> aggs[] = {
                {"SUM", AggregateFn::sum},
                {"COUNT", AggregateFn::count},
                {"MIN", AggregateFn::min},
                {"MAX", AggregateFn::max},
                {"AVG", AggregateFn::avg},
            };
            for (const auto& [name, fn] : aggs) {
                if (tok.upper == name && peek(1).text == "(") {
                    consume();
                    expect_symbol("(");
                    item.aggregate = fn;
                    if (fn == AggregateFn::count && peek().text == "*") {
                        consume();
                        item.count_star = true;
                    } else {
                        item.column = parse_column_ref();
                    }
                    expect_symbol(")");
                    return item;
                }
            }
        }
        item.column = parse_column_ref();
        return item;
    }

    CompareOp parse_compare_op() {
        const Token& tok = peek();
        if (tok.kind != TokenKind::symbol) {
            if (tok.kind == TokenKind::identifier) {
                reject_unsupported(tok);
            }
            throw ParseError("expected a comparison operator, got '" + tok.text + "'", tok.line,
                             tok.column);
        }
        std::string sym = consume().text;
        if (sym == "=") return CompareOp::eq;
        if (sym == "<") return CompareOp::lt;
        if (sym == ">") return CompareOp::gt;
        if (sym == "<=") return CompareOp::le;
        if (sym == ">=") return CompareOp::ge;
        if (sym == "<>") return CompareOp::ne;
        throw ParseError("expected a comparison operator, got '" + sym + "'", tok.line,
                         tok.column);
    }

    SelectStatement parse_select() {
        expect_keyword("SELECT");
        SelectStatement stmt;
        if (peek().text == "*") {
            consume();
            stmt.select_star = true;
        } else {
            while (true) {
                stmt.items.push_back(parse_select_item());
                if (peek().text == ",") {
                    consume();
                    continue;
                }
                break;
            }
        }
        expect_keyword("FROM");
        const Token& from_tok = peek();
        if (from_tok.text == "(") {
            throw UnsupportedFeatureError("subquery in FROM", from_tok.line, from_tok.column);
        }
        stmt.from_table = expect_identifier("table name");

        if (accept_keyword("JOIN")) {
            JoinClause join;
            join.table = expect_identifier("join table name");
            expect_keyword("ON");
            join.left = parse_column_ref();
            expect_symbol("=");
            join.right = parse_column_ref();
            stmt.join = join;
        } else if (peek().kind == TokenKind::identifier && peek().upper == "INNER") {
            consume();
            expect_keyword("JOIN");
            JoinClause join;
            join.table = expect_identifier("join table name");
            expect_keyword("ON");
            join.left = parse_column_ref();
            expect_symbol("=");
            join.right = parse_column_ref();
            stmt.join = join;
        }

        if (accept_keyword("WHERE")) {
            while (true) {
                const Token& open = peek();
                if (open.text == "(") {
                    throw UnsupportedFeatureError("parenthesized predicate", open.line,
                                                  open.column);
                }
                Predicate pred;
                pred.column = parse_column_ref();
                pred.op = parse_compare_op();
                const Token& lit_tok = peek();
                if (lit_tok.kind == TokenKind::identifier) {
                    reject_unsupported(lit_tok);
                    throw ParseError("predicates compare a column against a literal", lit_tok.line,
                                     lit_tok.column);
                }
                pred.literal = parse_literal();
                stmt.where.push_back(std::move(pred));
                if (accept_keyword("AND")) {
                    continue;
                }
                const Token& next = peek();
                if (next.kind == TokenKind::identifier) {
                    // A trailing OR (or similar) must name the construct.
                    for (const char* word : {"OR", "NOT", "IN", "LIKE", "BETWEEN"}) {
                        if (next.upper == word) {
                            throw UnsupportedFeatureError(word, next.line, next.column);
                        }
                    }
                }
                break;
            }
        }

        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            while (true) {
                stmt.group_by.push_back(parse_column_ref());
                if (peek().text == ",") {
                    consume();
                    continue;
                }
                break;
            }
        }

        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            OrderBy order;
            order.item = parse_select_item();
            if (accept_keyword("ASC")) {
                order.ascending = true;
            } else if (accept_keyword("DESC")) {
                order.ascending = false;
            }
            stmt.order_by = order;
        }

        if (accept_keyword("LIMIT")) {
            const Token& tok = peek();
            if (tok.kind != TokenKind::integer) {
                throw ParseError("LIMIT expects an integer, got '" + tok.text + "'", tok.line,
                                 tok.column);
            }
            stmt.limit = std::stoull(consume().text);
        }
        return stmt;
    }

    Lexer lexer_;
    std::size_t pos_ = 0;
};

std::string literal_sql(const Literal& lit) {
    if (!lit.quoted) {
        return lit.text;
    }
    std::string out = "'";
    for (char c : lit.text) {
        if (c == '\'') {
            out += "''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

}  // namespace

QueryAst parse(const std::string& sql) {
    Parser parser(sql);
    return parser.parse_statement();
}

std::string to_sql(const QueryAst& ast) {
    std::ostringstream out;
    switch (ast.kind) {
        case StatementKind::create_table: {
            out << "CREATE TABLE " << ast.create->table << " (";
            for (std::size_t i = 0; i < ast.create->columns.size(); ++i) {
                if (i) {
                    out << ", ";
                }
                out << ast.create->columns[i].name << " "
                    << column_type_name(ast.create->columns[i].type);
            }
            out << ")";
            break;
        }
        case StatementKind::insert: {
            out << "INSERT INTO " << ast.insert->table << " VALUES ";
            for (std::size_t r = 0; r < ast.insert->rows.size(); ++r) {
                if (r) {
                    out << ", ";
                }
                out << "(";
                const auto& row = ast.insert->rows[r];
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) {
                        out << ", ";
                    }
                    out << literal_sql(row[i]);
                }
                out << ")";
            }
            break;
        }
        case StatementKind::select: {
            const SelectStatement& s = *ast.select;
            out << "SELECT ";
            if (s.select_star) {
                out << "*";
            } else {
                for (std::size_t i = 0; i < s.items.size(); ++i) {
                    if (i) {
                        out << ", ";
                    }
                    out << s.items[i].display();
                }
            }
            out << " FROM " << s.from_table;
            if (s.join) {
                out << " JOIN " << s.join->table << " ON " << s.join->left.display() << " = "
                    << s.join->right.display();
            }
            for (std::size_t i = 0; i < s.where.size(); ++i) {
                out << (i == 0 ? " WHERE " : " AND ") << s.where[i].column.display() << " "
                    << compare_op_symbol(s.where[i].op) << " " << literal_sql(s.where[i].literal);
            }
            if (!s.group_by.empty()) {
                out << " GROUP BY ";
                for (std::size_t i = 0; i < s.group_by.size(); ++i) {
                    if (i) {
                        out << ", ";
                    }
                    out << s.group_by[i].display();
                }
            }
            if (s.order_by) {
                out << " ORDER BY " << s.order_by->item.display()
                    << (s.order_by->ascending ? " ASC" : " DESC");
            }
            if (s.limit) {
                out << " LIMIT " << *s.limit;
            }
            break;
        }
    }
    return out.str();
}

}  // namespace web3db::engine
