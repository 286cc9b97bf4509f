#include "refine_sdo/error.hpp"

namespace refine_sdo {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::SingularScaling: return "SingularScaling";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::FormError: return "FormError";
    case ErrorKind::NotStrictlyFeasible: return "NotStrictlyFeasible";
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::NeighborhoodEscape: return "NeighborhoodEscape";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::NonConverged: return "NonConverged";
    case ErrorKind::OracleFailure: return "OracleFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IndexOutOfBlock: return "IndexOutOfBlock";
    case ErrorKind::NonSymmetricDuplicate: return "NonSymmetricDuplicate";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
{
}

ParseError::ParseError(ErrorKind kind, int line, const std::string& reason)
    : Error(kind, "line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason)
{
}

void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace refine_sdo
