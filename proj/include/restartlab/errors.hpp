#pragma once

#include <stdexcept>
#include <string>

namespace restartlab {

// Invalid parameters, malformed configuration, broken preconditions.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Operation requires the complex-conjugate (oscillatory) regime.
class regime_error : public std::domain_error {
public:
    explicit regime_error(const std::string& what) : std::domain_error(what) {}
};

// det(T) <= 0: the outer step overshoots so far that the two-state map loses
// its rotational structure (NAG with (1-beta)*nu*sigma >= 1).
class overshoot_error : public regime_error {
public:
    explicit overshoot_error(const std::string& what) : regime_error(what) {}
};

}  // namespace restartlab
