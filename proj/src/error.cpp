#include "cmimp/error.hpp"

namespace cmimp {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::role_mismatch: return "RoleMismatch";
    case ErrorCode::span: return "SpanError";
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::io: return "IoError";
    }
    return "Unknown";
}

namespace {

std::string positioned(const std::string& source, std::size_t line, const std::string& what) {
    std::string out = source.empty() ? std::string("<input>") : source;
    if (line > 0) {
        out += ":" + std::to_string(line);
    }
    return out + ": " + what;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(ErrorCode::parse, positioned(source, line, what)), m_source(source), m_line(line) {}

}  // namespace cmimp
