#pragma once

#include <stdexcept>
#include <string>

namespace pgprisk {

/// Broad error category. The CLI maps these onto process exit codes.
enum class ErrorKind { Config, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message),
          kind_(kind),
          name_(std::move(name)),
          message_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Short error identifier, e.g. "InsufficientHistory".
    const std::string& name() const noexcept { return name_; }
    /// what() without the name prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string name_;
    std::string message_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message)
        : Error(ErrorKind::Config, "ConfigError", message) {}
};

// ---- data errors --------------------------------------------------------

class CsvError : public Error {
public:
    CsvError(const std::string& message, long row = -1)
        : Error(ErrorKind::Data, "CsvError", message), row_(row) {}
    /// 1-based data row (header excluded), or -1 when not row specific.
    long row() const noexcept { return row_; }

private:
    long row_;
};

class InvalidSeries : public Error {
public:
    explicit InvalidSeries(const std::string& message)
        : Error(ErrorKind::Data, "InvalidSeries", message) {}
};

class DegenerateWindow : public Error {
public:
    explicit DegenerateWindow(const std::string& message)
        : Error(ErrorKind::Data, "DegenerateWindow", message) {}
};

class InsufficientHistory : public Error {
public:
    explicit InsufficientHistory(const std::string& message)
        : Error(ErrorKind::Data, "InsufficientHistory", message) {}
};

// ---- numerical errors ---------------------------------------------------

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message)
        : Error(ErrorKind::Numerical, "DomainError", message) {}
};

class NonPositiveDefinite : public Error {
public:
    explicit NonPositiveDefinite(const std::string& message)
        : Error(ErrorKind::Numerical, "NonPositiveDefinite", message) {}
};

class OptimizerDiverged : public Error {
public:
    explicit OptimizerDiverged(const std::string& message)
        : Error(ErrorKind::Numerical, "OptimizerDiverged", message) {}
};

class TailMassUnderflow : public Error {
public:
    explicit TailMassUnderflow(const std::string& message)
        : Error(ErrorKind::Numerical, "TailMassUnderflow", message) {}
};

}  // namespace pgprisk
