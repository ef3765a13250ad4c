#ifndef PROBLOG_ERRORS_HPP
#define PROBLOG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace problog {

enum class ErrorCode {
    SyntaxError,
    ProbabilityOutOfRange,
    MixedDefinition,
    NonCallable,
    DepthLimitExceeded,
    NonGroundFact,
    InstantiationError,
    TypeError,
    ArithmeticError,
    EmptyEngineStack,
    CurrentWithoutContext,
    InvalidOptions,
    UniverseTooLarge,
    MissingWeight,
    OrderMismatch,
    NoAnswers,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures surface as this exception; unification failure is
// not an error and is reported through empty optionals / exhausted streams.
class ProblogError : public std::runtime_error {
public:
    ProblogError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ProblogError(ErrorCode code, const std::string& message, int line, int column)
        : std::runtime_error(message + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          code_(code),
          line_(line),
          column_(column) {}

    ErrorCode code() const { return code_; }
    int line() const { return line_; }      // -1 when not positional
    int column() const { return column_; }

private:
    ErrorCode code_;
    int line_ = -1;
    int column_ = -1;
};

} // namespace problog

#endif
