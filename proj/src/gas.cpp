#include "transonic/gas.hpp"

#include <cmath>

namespace transonic {

namespace {
void check_state(const FlowState& s) {
  if (!(s.rho > 0.0) || !(s.p > 0.0))
    throw ValidationError("flow state needs rho > 0 and p > 0");
}
}  // namespace

GasModel make_gas(double gamma, const FlowState& inflow) {
  if (!(gamma > 1.0)) throw ValidationError("gamma must exceed 1");
  check_state(inflow);
  GasModel gas{gamma, 0.0};
  gas.b0 = 0.5 * inflow.u * inflow.u +
           gamma * inflow.p / ((gamma - 1.0) * inflow.rho);
  return gas;
}

double sound_speed(const GasModel& gas, const FlowState& s) {
  check_state(s);
  return std::sqrt(gas.gamma * s.p / s.rho);
}

double bernoulli(const GasModel& gas, const FlowState& s) {
  check_state(s);
  return 0.5 * s.u * s.u + gas.gamma * s.p / ((gas.gamma - 1.0) * s.rho);
}

double density_from_bernoulli(const GasModel& gas, double u, double p) {
  if (!(p > 0.0)) throw ValidationError("pressure must be positive");
  double head = gas.b0 - 0.5 * u * u;
  if (!(head > 0.0)) throw CavitationError("speed at or beyond the vacuum bound");
  return gas.gamma * p / ((gas.gamma - 1.0) * head);
}

MachClass mach_class(const GasModel& gas, const FlowState& s, double tol_sonic) {
  check_state(s);
  double c2 = gas.gamma * s.p / s.rho;
  double d = s.u * s.u - c2;
  if (d > tol_sonic * c2) return MachClass::Supersonic;
  if (d < -tol_sonic * c2) return MachClass::Subsonic;
  return MachClass::Sonic;
}

double isentropic_density(const GasModel& gas, double q2) {
  double arg = 1.0 - 0.5 * (gas.gamma - 1.0) * q2;
  if (!(arg > 0.0)) throw CavitationError("speed at or beyond the vacuum bound");
  return std::pow(arg, 1.0 / (gas.gamma - 1.0));
}

double entropy_measure(const GasModel& gas, const FlowState& s) {
  check_state(s);
  return s.p / std::pow(s.rho, gas.gamma);
}

}  // namespace transonic
