#pragma once

#include "transonic/gas.hpp"
#include "transonic/util.hpp"

namespace transonic {

struct RadialSolution;  // defined in radial.hpp

struct JumpResult {
  FlowState upstream;
  FlowState downstream;
  double normal_speed_up;
  double normal_speed_down;
};

struct RhResiduals {
  double mass;
  double momentum;
  double energy;
};

// upstream data evaluated on the shock, used to seed the transported quantity
struct UpstreamAtShock {
  Vec2 grad_phi;  // upstream velocity in the local polar frame
  double p;
  double rho;
};

// radial normal shock via the Prandtl relation; downstream closed by the
// Bernoulli density
JumpResult rh_jump_radial(const GasModel& gas, const FlowState& up);

// raw bracket residuals of mass, normal momentum and total enthalpy
RhResiduals rh_residuals(const GasModel& gas, const FlowState& up,
                         const FlowState& down, double normal_speed_up,
                         double normal_speed_down);

// generalized squared normal-velocity product across a curved shock under a
// background coordinate deformation with Jacobian jac_psi
double k_s(const GasModel& gas, Vec2 grad_phi_minus, Vec2 grad_phi_plus,
           double p_minus, double rho_minus, const Mat2& jac_psi);

// line-averaged shock-condition coefficient along the segment from the
// background shock radius to f_theta
double mu_f(const GasModel& gas, const RadialSolution& sol, double f_theta);

// initial value of the transported entropy-like quantity on the shock
double e_init(const GasModel& gas, const UpstreamAtShock& up_fields,
              Vec2 grad_phi_plus, const Mat2& jac_psi, double f_theta);

}  // namespace transonic
