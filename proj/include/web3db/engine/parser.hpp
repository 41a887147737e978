#ifndef WEB3DB_ENGINE_PARSER_HPP
#define WEB3DB_ENGINE_PARSER_HPP

#include <string>

#include "web3db/common.hpp"
#include "web3db/engine/ast.hpp"

namespace web3db::engine {

// Parse failure with a byte-precise position.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
                msg),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

// Syntactically valid SQL that uses a construct outside the supported
// subset; the message names the construct.
struct UnsupportedFeatureError : Error {
    UnsupportedFeatureError(const std::string& construct, std::size_t line, std::size_t column)
        : Error("unsupported SQL feature at " + std::to_string(line) + ":" +
                std::to_string(column) + ": " + construct),
          construct(construct),
          line(line),
          column(column) {}
    std::string construct;
    std::size_t line;
    std::size_t column;
};

QueryAst parse(const std::string& sql);

}  // namespace web3db::engine

#endif
