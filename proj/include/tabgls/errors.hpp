#pragma once

#include <stdexcept>
#include <string>

namespace tabgls {

// Root of every error thrown by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

// Cells overlap or leave a gap in the grid.
class StructureError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string format, std::size_t line, std::size_t offset, std::string reason);

    const std::string& format() const noexcept { return format_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string format_;
    std::size_t line_;
    std::size_t offset_;
    std::string reason_;
};

// The target format cannot express something the table contains.
class CapabilityError : public Error {
public:
    using Error::Error;
};

// Malformed input records (corpus manifests, gold files, predictions).
class DataError : public Error {
public:
    using Error::Error;
};

class InputError : public DataError {
public:
    using DataError::DataError;
};

class ReconciliationError : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Transport failures after retries, exhausted scripted queues, unknown oracle
// questions.
class BackendError : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

// A pipeline stage could not produce a usable result. Carries the raw model
// response for auditing.
class StageError : public Error {
public:
    StageError(const std::string& message, std::string raw_response)
        : Error(message), raw_response_(std::move(raw_response)) {}

    const std::string& raw_response() const noexcept { return raw_response_; }

private:
    std::string raw_response_;
};

class SchemaError : public StageError {
public:
    SchemaError(const std::string& key, std::string raw_response)
        : StageError("missing or invalid required key \"" + key + "\"", std::move(raw_response)),
          key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class EmptyEvidenceError : public StageError {
public:
    using StageError::StageError;
};

}  // namespace tabgls
