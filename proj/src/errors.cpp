#include "qbm/errors.hpp"

namespace qbm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::UnphysicalState: return "UNPHYSICAL_STATE";
    case ErrorCode::NumericDomain: return "NUMERIC_DOMAIN";
    case ErrorCode::ZeroParameter: return "ZERO_PARAMETER";
    case ErrorCode::DegenerateForm: return "DEGENERATE_FORM";
    case ErrorCode::DivergentAtZero: return "DIVERGENT_AT_ZERO";
    case ErrorCode::QuadratureFailure: return "QUADRATURE_FAILURE";
    case ErrorCode::UnphysicalInitial: return "UNPHYSICAL_INITIAL";
    case ErrorCode::IntegratorFailure: return "INTEGRATOR_FAILURE";
    case ErrorCode::NotConverged: return "NOT_CONVERGED";
    case ErrorCode::NoBracket: return "NO_BRACKET";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace qbm
