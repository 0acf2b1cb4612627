#ifndef RANDCAV_ERRORS_HPP
#define RANDCAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace randcav
{
// Precondition or invariant violation on user-supplied data. The message
// names the violated invariant.
class ValidationError : public std::invalid_argument
{
public:
    explicit ValidationError(const std::string &what) : std::invalid_argument(what) {}
};

// Overflow/NaN detected inside a numeric kernel; never returned silently.
class NumericError : public std::runtime_error
{
public:
    explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

// Mean log-transmission is non-negative: no exponential decay to invert.
class NoDecayError : public std::runtime_error
{
public:
    explicit NoDecayError(const std::string &what) : std::runtime_error(what) {}
};

// Wronskian (or an equivalent denominator) collapsed below representable range.
class DegenerateError : public std::runtime_error
{
public:
    explicit DegenerateError(const std::string &what) : std::runtime_error(what) {}
};
} // namespace randcav

#endif // RANDCAV_ERRORS_HPP
