#pragma once

#include <vector>

#include "transonic/gas.hpp"
#include "transonic/jump.hpp"
#include "transonic/util.hpp"

namespace transonic {

struct NozzleRadial {
  double r0;     // inner radius
  double r1;     // outer radius
  int n;         // spatial dimension
  double delta;  // extension margin for branch continuation

  NozzleRadial(double r0_, double r1_, int n_, double delta_ = -1.0);
};

enum class BranchKind { Supersonic, Subsonic };

// one smooth branch of the radial ODE system, sampled on a uniform grid with
// stored derivatives so intermediate radii evaluate by cubic Hermite
struct RadialBranch {
  BranchKind kind = BranchKind::Supersonic;
  std::vector<double> r, u, p, rho, du, dp, drho, phi;

  double r_lo() const { return r.front(); }
  double r_hi() const { return r.back(); }
  double eval_u(double rq) const;
  double eval_p(double rq) const;
  double eval_rho(double rq) const;
  double eval_du(double rq) const;
  double eval_dp(double rq) const;
  double eval_phi(double rq) const;
};

// background transonic solution with a radial shock at r_s; the supersonic
// branch spans the whole nozzle (its continuation past the shock is needed by
// the 2D machinery), the subsonic branch spans [r_s - 2 delta, r1]
struct RadialSolution {
  GasModel gas{1.4, 0.0};
  NozzleRadial noz{1.0, 2.0, 2};
  double r_s = 0.0;
  RadialBranch sup;
  RadialBranch sub;
  JumpResult jump{};

  double u_minus(double r) const { return sup.eval_u(r); }
  double p_minus(double r) const { return sup.eval_p(r); }
  double rho_minus(double r) const { return sup.eval_rho(r); }
  double du_minus(double r) const { return sup.eval_du(r); }
  double phi_minus(double r) const { return sup.eval_phi(r); }
  double u_plus(double r) const { return sub.eval_u(r); }
  double p_plus(double r) const { return sub.eval_p(r); }
  double rho_plus(double r) const { return sub.eval_rho(r); }
  double du_plus(double r) const { return sub.eval_du(r); }
  double phi_plus(double r) const { return sub.eval_phi(r); }
};

struct OdeRhs {
  double du_dr;
  double dp_dr;
};

OdeRhs rhs_ode(const GasModel& gas, int n, double r, double u, double p);

RadialBranch integrate_branch(const GasModel& gas, const NozzleRadial& noz,
                              double start_r, double end_r, double u0,
                              double p0, double h);

RadialSolution background_solution(const GasModel& gas,
                                   const NozzleRadial& noz,
                                   const FlowState& inflow, double r_s,
                                   double h = -1.0);

double exit_pressure(const GasModel& gas, const NozzleRadial& noz,
                     const FlowState& inflow, double r_s);

double locate_shock(const GasModel& gas, const NozzleRadial& noz,
                    const FlowState& inflow, double p_c,
                    double tol_r = 1e-10);

// zeroth-order coefficient of the shock boundary condition at the background
double mu0(const GasModel& gas, const NozzleRadial& noz,
           const RadialSolution& sol);

// d/dr of (post-shock pressure along the supersonic branch minus subsonic
// branch pressure) at the shock; strictly negative
double shock_pressure_slope_gap(const GasModel& gas, const NozzleRadial& noz,
                                const RadialSolution& sol);

struct IsentropicExit {
  double exit_u;
  double exit_p;
};

// isentropic transonic family with a shock at r_s: exit data depend on the
// mass flux only, not on r_s
IsentropicExit isentropic_radial_family(const GasModel& gas,
                                        const NozzleRadial& noz,
                                        double flux_const, double r_s);

}  // namespace transonic
