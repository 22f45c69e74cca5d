#pragma once

#include <stdexcept>
#include <string>

namespace diracscar {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Request falls outside the envelope where accuracy has been validated.
class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (root shortfall, eigensolver, tolerance check).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or user input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Reading or writing a file failed, or its content is malformed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An artifact required by a pipeline step is absent.
class MissingPrerequisite : public std::runtime_error {
public:
    explicit MissingPrerequisite(const std::string& what_path)
        : std::runtime_error("missing prerequisite: " + what_path), path_(what_path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace diracscar
