#ifndef PROBLOG_PARSER_HPP
#define PROBLOG_PARSER_HPP

#include <string>
#include <string_view>

#include "problog/program.hpp"
#include "problog/term.hpp"

namespace problog {

// Statements are `.`-terminated: `P :: head.`, `head.` or `head :- body.`;
// `%` starts a line comment. Raises ProblogError with line/column on syntax
// errors, on probabilities outside [0,1], and on mixed definitions.
Program parse_program(std::string_view text);

// A single callable term, optionally `.`-terminated. Occurrences of the same
// variable name denote the same variable.
TermPtr parse_query(std::string_view text);

} // namespace problog

#endif
