#pragma once

#include <stdexcept>
#include <string>

namespace nucs {

/// Invalid option or parameter combination (CLI exit code 1).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (CLI exit code 2).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure, e.g. a factorization that did not converge (CLI exit code 3).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nucs
