#pragma once

#include "transonic/errors.hpp"

namespace transonic {

// polytropic gas together with the global Bernoulli constant of the flow
struct GasModel {
  double gamma;  // adiabatic exponent, > 1
  double b0;     // Bernoulli constant

  // critical speed squared: u^2 at the sonic threshold when the Bernoulli
  // constant equals b0
  double k0() const { return 2.0 * (gamma - 1.0) * b0 / (gamma + 1.0); }
};

enum class MachClass { Subsonic, Sonic, Supersonic };

struct FlowState {
  double rho;  // density
  double u;    // speed (radial component of the potential gradient)
  double p;    // pressure
};

// builds the gas model whose Bernoulli constant matches the given state
GasModel make_gas(double gamma, const FlowState& inflow);

double sound_speed(const GasModel& gas, const FlowState& s);
double bernoulli(const GasModel& gas, const FlowState& s);
double density_from_bernoulli(const GasModel& gas, double u, double p);
MachClass mach_class(const GasModel& gas, const FlowState& s,
                     double tol_sonic = 1e-9);
// normalized isentropic density as a function of speed squared
double isentropic_density(const GasModel& gas, double q2);
double entropy_measure(const GasModel& gas, const FlowState& s);

}  // namespace transonic
