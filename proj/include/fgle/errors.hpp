#pragma once

#include <stdexcept>
#include <string>

namespace fgle {

// Validation errors map to CLI exit code 1, numerical failures to exit code 2.
enum class ErrorCategory { Validation, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define FGLE_DEFINE_ERROR(Name, Category)                                 \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(Category, what) {}    \
  }

FGLE_DEFINE_ERROR(DomainError, ErrorCategory::Validation);
FGLE_DEFINE_ERROR(ConfigError, ErrorCategory::Validation);
FGLE_DEFINE_ERROR(GridMismatch, ErrorCategory::Validation);
FGLE_DEFINE_ERROR(SoeMismatch, ErrorCategory::Validation);
FGLE_DEFINE_ERROR(PlanInfeasible, ErrorCategory::Validation);
FGLE_DEFINE_ERROR(QuadratureFailure, ErrorCategory::Numerical);
FGLE_DEFINE_ERROR(NotPositiveDefinite, ErrorCategory::Numerical);
FGLE_DEFINE_ERROR(CertificationFailure, ErrorCategory::Numerical);
FGLE_DEFINE_ERROR(NonFinite, ErrorCategory::Numerical);
FGLE_DEFINE_ERROR(DegenerateFit, ErrorCategory::Numerical);

#undef FGLE_DEFINE_ERROR

}  // namespace fgle
