#pragma once

#include <stdexcept>
#include <string>

namespace fgpl {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kIo = 3,
    kNumeric = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept = 0;
    virtual const char* kind() const noexcept = 0;
};

/// Invalid argument, domain violation or dimension mismatch.
class ValidationError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
    const char* kind() const noexcept override { return "validation"; }
};

/// Inconsistent combination of options (e.g. a correlation-aware loss without a lattice).
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
    const char* kind() const noexcept override { return "config"; }
};

/// Malformed record in a text file. Carries the 1-based line number.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& detail, std::size_t line, const std::string& source = {})
        : ValidationError((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " +
                          detail),
          detail_(detail), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    const char* kind() const noexcept override { return "parse"; }
    ParseError with_source(const std::string& source) const { return ParseError(detail_, line_, source); }

private:
    std::string detail_;
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
    const char* kind() const noexcept override { return "io"; }
};

/// Non-finite values in inputs or during optimization.
class NumericError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kNumeric; }
    const char* kind() const noexcept override { return "numeric"; }
};

}  // namespace fgpl
