#pragma once

#include <stdexcept>
#include <string>

namespace p1dgp2 {

// Malformed input files. Carries the file name and 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line)
    {
    }

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }

private:
    std::string file_;
    int line_;
};

// Invalid user-supplied settings (bad markers, unsupported quadrature, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function (e.g. point outside the reference simplex).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Dimension or size mismatch between operands.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Factorization failure, non-convergence, or a blown-up time integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed result violates a property that must hold for a correct implementation.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace p1dgp2
