#pragma once

#include <string>
#include <variant>

#include "jafun/syntax.hpp"

namespace jafun {

struct ParseError {
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
};

std::string to_string(const ParseError& e);

using ParseResult = std::variant<Program, ParseError>;

/// Text -> Program. The concrete grammar restricts argument and operand
/// positions to values (identifier / this / null); anything else is a
/// parse error. Unannotated methods are normalized to all-RWR modes with
/// annotated=false; mixed mode annotations within one method are rejected.
ParseResult parse_program(const std::string& source);

/// Prepends the predefined Object and NPE class declarations when absent.
/// Total and idempotent; user redefinitions surface later in well_formed.
Program load(Program p);

}  // namespace jafun
