#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmimp {

enum class ErrorCode {
    invalid_argument,
    grid_mismatch,
    role_mismatch,
    span,
    parse,
    io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the core library is an Error. The C API maps the
// code one-to-one onto cmimp_status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), m_code(code) {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

// Positioned parse failure. line is 1-based; 0 means "whole document".
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);

    const std::string& source() const noexcept { return m_source; }
    std::size_t line() const noexcept { return m_line; }

private:
    std::string m_source;
    std::size_t m_line;
};

}  // namespace cmimp
