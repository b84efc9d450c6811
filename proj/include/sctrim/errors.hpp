#pragma once

#include <stdexcept>
#include <string>

namespace sctrim {

// Bad input data: malformed CSV, missing cells, invalid panel shape.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated an operation's preconditions (bad rank, bad t0, ...).
class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not produce a result (factorization failure,
// rank-deficient regression).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sctrim
