#pragma once

#include <stdexcept>
#include <string>

namespace netmed {

/// Bad input: malformed files, violated preconditions, infeasible conditions.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Non-finite values or other numerical breakdowns during estimation.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

}  // namespace netmed
