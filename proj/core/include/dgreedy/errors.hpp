#pragma once

#include <stdexcept>
#include <string>

namespace dgreedy {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input; carries the offending field name.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config error [" + field + "]: " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotSpdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Reduced saddle system not solvable: the test space needs stabilization.
class UnstableError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StabilizationStalled : public NumericalError {
public:
    StabilizationStalled(double mu, double value, const std::string& what)
        : NumericalError(what), mu_(mu), value_(value) {}
    double mu() const noexcept { return mu_; }
    double value() const noexcept { return value_; }

private:
    double mu_;
    double value_;
};

class SnapshotDependent : public NumericalError {
public:
    SnapshotDependent(double mu, const std::string& what) : NumericalError(what), mu_(mu) {}
    double mu() const noexcept { return mu_; }

private:
    double mu_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace dgreedy
