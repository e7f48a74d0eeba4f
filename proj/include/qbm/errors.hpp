#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbm {

enum class ErrorCode {
  InvalidArgument,
  UnphysicalState,
  NumericDomain,
  ZeroParameter,
  DegenerateForm,
  DivergentAtZero,
  QuadratureFailure,
  UnphysicalInitial,
  IntegratorFailure,
  NotConverged,
  NoBracket,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qbm
