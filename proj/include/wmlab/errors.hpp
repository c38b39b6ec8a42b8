#pragma once

#include <stdexcept>
#include <string>

namespace wmlab {

// Base of every library error. exit_code() is the CLI status for the family.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 2; }
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Model, parameter range or scheme/theory pairing that is not implemented.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class DegenerateHostError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    int exit_code() const override { return 4; }
    double residual() const { return residual_; }

private:
    double residual_;
};

}  // namespace wmlab
