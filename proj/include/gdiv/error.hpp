#pragma once

#include <stdexcept>
#include <string>

namespace gdiv {

/// Thrown when an operation is called outside its documented domain
/// (division by zero, N beyond a table, parameters out of range, ...).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const char* message)
{
    if (!condition) throw PreconditionError(message);
}

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw PreconditionError(message);
}

} // namespace gdiv
