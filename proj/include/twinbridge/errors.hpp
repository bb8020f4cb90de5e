#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twinbridge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A grid or buffer would exceed its configured size cap.
class SizeError : public Error {
public:
    using Error::Error;
};

/// No unobserved state is left to select from. Callers treat this as normal termination.
class ExhaustedSpace : public Error {
public:
    ExhaustedSpace() : Error("state space exhausted") {}
};

/// A replay environment was asked for a state it has no record of.
class UnknownState : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    DuplicateError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Cholesky factorisation failed even after jitter escalation.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// BNN training produced a non-finite or diverging loss.
class TrainingError : public Error {
public:
    TrainingError(std::size_t epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

/// Invalid experiment configuration; carries the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace twinbridge
