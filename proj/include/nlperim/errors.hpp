#pragma once

#include <stdexcept>
#include <string>

namespace nlp {

enum class ErrorKind { Domain, Precondition, Unsupported, Io, Numeric, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) fail(kind, what);
}

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Io: return "io";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

}  // namespace nlp
