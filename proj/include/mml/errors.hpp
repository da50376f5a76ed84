#ifndef MML_ERRORS_HPP
#define MML_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mml {

enum class ErrorKind {
    input,
    structure,
    parse,
    selector,
    empty_result,
    config,
    numeric,
    range,
    training_failure,
};

const char *to_string(ErrorKind kind);

// Base of every error raised by the library. The kind lets callers (the CLI
// in particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(what), kind_(kind)
    {
    }
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error
{
public:
    ParseError(std::string source, std::size_t line, const std::string &msg)
        : Error(ErrorKind::parse,
                source + ":" + std::to_string(line) + ": " + msg),
          source_(std::move(source)), line_(line)
    {
    }
    const std::string &source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

inline const char *to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::input: return "input-error";
    case ErrorKind::structure: return "structure-error";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::selector: return "selector-error";
    case ErrorKind::empty_result: return "empty-result";
    case ErrorKind::config: return "config-error";
    case ErrorKind::numeric: return "numeric-error";
    case ErrorKind::range: return "range-error";
    case ErrorKind::training_failure: return "training-failure";
    }
    return "error";
}

} // namespace mml

#endif
