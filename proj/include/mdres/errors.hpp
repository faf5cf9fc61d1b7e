#pragma once

#include <stdexcept>
#include <string>

namespace mdres {

// Input text could not be parsed. Carries 1-based line/column when known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, int line = 0, int col = 0)
        : std::runtime_error(format(msg, line, col)), line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    static std::string format(const std::string& msg, int line, int col) {
        if (line <= 0) return msg;
        return "line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg;
    }
    int line_;
    int col_;
};

// An operation was invoked outside its stated precondition.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A similarity operator ran out of mutually dissimilar values.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A chase/search budget was exhausted before the result was complete.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mdres
