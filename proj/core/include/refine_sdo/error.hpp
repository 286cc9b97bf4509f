#pragma once

#include <stdexcept>
#include <string>

namespace refine_sdo {

enum class ErrorKind {
    LayoutMismatch,
    DimMismatch,
    NoConvergence,
    NotPositiveDefinite,
    Singular,
    SingularScaling,
    RankDeficient,
    FormError,
    NotStrictlyFeasible,
    InvalidParameters,
    NeighborhoodEscape,
    MaxIterations,
    NonConverged,
    OracleFailure,
    ParseError,
    IndexOutOfBlock,
    NonSymmetricDuplicate,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Input errors carry the 1-based line where they were detected.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, int line, const std::string& reason);

    int line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    int line_;
    std::string reason_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

} // namespace refine_sdo
