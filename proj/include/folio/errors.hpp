#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace folio {

// Coarse error classes. The CLI maps these onto exit codes.
enum class ErrorClass {
    validation,
    io,
    provider,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string code, const std::string& what)
        : std::runtime_error(what), class_(cls), code_(std::move(code)) {}

    ErrorClass error_class() const noexcept { return class_; }
    // Stable machine-readable name, e.g. "EmptyInput".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorClass class_;
    std::string code_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string code, const std::string& what)
        : Error(ErrorClass::validation, std::move(code), what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::io, "IoError", what) {}
};

class ProviderError : public Error {
public:
    ProviderError(std::string code, const std::string& what)
        : Error(ErrorClass::provider, std::move(code), what) {}
};

struct EmptyInput : ValidationError {
    explicit EmptyInput(const std::string& what) : ValidationError("EmptyInput", what) {}
};

struct MalformedHeadingNesting : ValidationError {
    MalformedHeadingNesting(int line, const std::string& what)
        : ValidationError("MalformedHeadingNesting", "line " + std::to_string(line) + ": " + what),
          line_number(line) {}
    int line_number;
};

struct PreconditionViolation : ValidationError {
    explicit PreconditionViolation(const std::string& what)
        : ValidationError("PreconditionViolation", what) {}
};

struct ProviderUnavailable : ProviderError {
    explicit ProviderUnavailable(const std::string& what)
        : ProviderError("ProviderUnavailable", what) {}
};

struct ProviderTimeout : ProviderError {
    explicit ProviderTimeout(const std::string& what) : ProviderError("Timeout", what) {}
};

struct SchemaViolationExhausted : ProviderError {
    SchemaViolationExhausted(const std::string& what, std::vector<std::string> diagnostics)
        : ProviderError("SchemaViolationExhausted", what), attempts(std::move(diagnostics)) {}
    // One entry per failed attempt, in order.
    std::vector<std::string> attempts;
};

}  // namespace folio
