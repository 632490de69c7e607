#pragma once

#include <stdexcept>
#include <string>

namespace rugtrace {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse_error", m) {}
};

/// A fixture record could not be read. The message names file and line.
struct LoadError : Error {
    explicit LoadError(const std::string& m) : Error("load_error", m) {}
};

/// Cross-reference or ordering invariant violated (dangling tx hash,
/// inconsistent pagination, duplicate position).
struct IntegrityError : Error {
    explicit IntegrityError(const std::string& m) : Error("integrity_error", m) {}
};

/// A log matched a known event signature but its payload does not follow the
/// ABI layout for that event.
struct MalformedEventError : Error {
    explicit MalformedEventError(const std::string& m) : Error("malformed_event", m) {}
};

struct TransportError : Error {
    explicit TransportError(const std::string& m) : Error("transport_error", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config_error", m) {}
};

struct NotFoundError : Error {
    explicit NotFoundError(const std::string& m) : Error("not_found", m) {}
};

}  // namespace rugtrace
