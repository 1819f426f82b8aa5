#ifndef QUIZFORGE_ERROR_HPP
#define QUIZFORGE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace quizforge {

// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error in an expression, bank, spec or data file.
// `offset` is a byte offset into the source that was being parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Runtime evaluation failure: unbound symbol, domain error, bad format input.
class EvalError : public Error {
public:
    using Error::Error;
};

// Converts a byte offset into "line L, column C" (both 1-based) for messages.
inline std::string describe_position(std::string_view source, std::size_t offset) {
    std::size_t line = 1, col = 1;
    if (offset > source.size()) offset = source.size();
    for (std::size_t i = 0; i < offset; ++i) {
        if (source[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace quizforge

#endif
