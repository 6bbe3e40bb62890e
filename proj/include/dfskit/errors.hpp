// errors.hpp: exception hierarchy shared by every dfskit module

#pragma once

#include <stdexcept>
#include <string>

namespace dfskit {

// Base class. `code()` is a stable machine-readable identifier; `path()` points
// into the offending document (JSON pointer) when the error came from a file.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what, std::string path = {})
        : std::runtime_error(what), code_(std::move(code)), path_(std::move(path)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    std::string code_;
    std::string path_;
};

// Operand dimensions do not fit together.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what, std::string path = {})
        : Error("shape_error", what, std::move(path)) {}
};

// A documented precondition of an operation does not hold.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what, std::string path = {})
        : Error("contract_violation", what, std::move(path)) {}
};

// A domain object would break one of its invariants (non-Hermitian H, ...).
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what, std::string path = {})
        : Error("invariant_violation", what, std::move(path)) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string path = {})
        : Error("parse_error", what, std::move(path)) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what, std::string path = {})
        : Error("schema_error", what, std::move(path)) {}
};

} // namespace dfskit
