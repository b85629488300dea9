#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcaa {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    NotPositiveDefinite,
    Ruin,
    EmptyTail,
    Infeasible,
    Data,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::DimensionMismatch: return "dimension_mismatch";
        case ErrorKind::NotPositiveDefinite: return "not_positive_definite";
        case ErrorKind::Ruin: return "ruin";
        case ErrorKind::EmptyTail: return "empty_tail";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Data: return "data";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// Single exception type for the library; `kind()` is the machine-readable part.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace dcaa
