#pragma once

#include <stdexcept>
#include <string>

namespace transonic {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define TRANSONIC_DEFINE_ERROR(NAME) \
  struct NAME : Error {              \
    explicit NAME(const std::string& msg) : Error(msg) {} \
  }

TRANSONIC_DEFINE_ERROR(CavitationError);
TRANSONIC_DEFINE_ERROR(SonicSingularityError);
TRANSONIC_DEFINE_ERROR(NotSupersonicError);
TRANSONIC_DEFINE_ERROR(DegenerateShockError);
TRANSONIC_DEFINE_ERROR(DomainError);
TRANSONIC_DEFINE_ERROR(PressureOutOfRangeError);
TRANSONIC_DEFINE_ERROR(NoRootError);
TRANSONIC_DEFINE_ERROR(EllipticityLossError);
TRANSONIC_DEFINE_ERROR(ObliquenessError);
TRANSONIC_DEFINE_ERROR(SolverDivergenceError);
TRANSONIC_DEFINE_ERROR(TrustRegionError);
TRANSONIC_DEFINE_ERROR(FrontEscapeError);
TRANSONIC_DEFINE_ERROR(NoConvergenceError);
TRANSONIC_DEFINE_ERROR(RadialFloorError);
TRANSONIC_DEFINE_ERROR(StepFailureError);
TRANSONIC_DEFINE_ERROR(ModeSolveError);
TRANSONIC_DEFINE_ERROR(NearSingularError);
TRANSONIC_DEFINE_ERROR(ParseError);
TRANSONIC_DEFINE_ERROR(ValidationError);
TRANSONIC_DEFINE_ERROR(IoError);

#undef TRANSONIC_DEFINE_ERROR

}  // namespace transonic
