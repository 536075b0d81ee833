#include "transonic/jump.hpp"

#include <cmath>

#include "transonic/radial.hpp"

namespace transonic {

JumpResult rh_jump_radial(const GasModel& gas, const FlowState& up) {
  double drift = std::abs(bernoulli(gas, up) - gas.b0);
  if (drift > 1e-8 * std::abs(gas.b0))
    throw ValidationError("upstream state off the Bernoulli surface");
  if (mach_class(gas, up) == MachClass::Subsonic)
    throw NotSupersonicError("upstream state must be supersonic");

  double k0 = gas.k0();
  double u_down = k0 / up.u;
  double p_down = up.rho * up.u * up.u + up.p - up.rho * k0;
  double rho_down = density_from_bernoulli(gas, u_down, p_down);
  return {up, {rho_down, u_down, p_down}, up.u, u_down};
}

RhResiduals rh_residuals(const GasModel& gas, const FlowState& up,
                         const FlowState& down, double normal_speed_up,
                         double normal_speed_down) {
  double g = gas.gamma;
  double mass = up.rho * normal_speed_up - down.rho * normal_speed_down;
  double mom = (up.rho * normal_speed_up * normal_speed_up + up.p) -
               (down.rho * normal_speed_down * normal_speed_down + down.p);
  double en = (0.5 * normal_speed_up * normal_speed_up +
               g * up.p / ((g - 1.0) * up.rho)) -
              (0.5 * normal_speed_down * normal_speed_down +
               g * down.p / ((g - 1.0) * down.rho));
  return {mass, mom, en};
}

namespace {

struct ShockFrame {
  Vec2 nu;        // unit normal from the gradient jump
  double qn;      // corrected upstream normal speed
  double vplus;   // corrected downstream normal speed factor, for callers
};

ShockFrame shock_frame(Vec2 grad_phi_minus, Vec2 grad_phi_plus,
                       const Mat2& jac_psi) {
  Vec2 d = grad_phi_minus - grad_phi_plus;
  double dn = norm(d);
  double scale = norm(grad_phi_minus) + norm(grad_phi_plus);
  if (!(dn > 1e-12 * (scale + 1.0)))
    throw DegenerateShockError("coincident gradients across the shock");
  Vec2 nu = d / dn;
  Mat2 minv = jac_psi.inverse();
  Mat2 q2 = minv.transpose() * minv;
  double corr = dn / norm(minv * d);
  double qn = corr * dot(q2 * grad_phi_minus, nu);
  double vplus = corr * dot(q2 * grad_phi_plus, nu);
  return {nu, qn, vplus};
}

}  // namespace

double k_s(const GasModel& gas, Vec2 grad_phi_minus, Vec2 grad_phi_plus,
           double p_minus, double rho_minus, const Mat2& jac_psi) {
  ShockFrame fr = shock_frame(grad_phi_minus, grad_phi_plus, jac_psi);
  double g = gas.gamma;
  return 2.0 * (g - 1.0) / (g + 1.0) *
         (0.5 * fr.qn * fr.qn + g * p_minus / ((g - 1.0) * rho_minus));
}

double mu_f(const GasModel& gas, const RadialSolution& sol, double f_theta) {
  double two_delta = 2.0 * sol.noz.delta;
  if (std::abs(f_theta - sol.r_s) > two_delta * (1.0 + 1e-12))
    throw DomainError("front radius outside the extended branch domain");

  double k0 = gas.k0();
  const Quad8& q = gauss8();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 8; ++k) {
    double r = sol.r_s + q.t[k] * (f_theta - sol.r_s);
    double um = sol.u_minus(r);
    double dum = sol.du_minus(r);
    double dup = sol.du_plus(r);
    // d/dr of (K0/u_minus - u_plus)
    num += q.w[k] * (-k0 * dum / (um * um) - dup);
    den += q.w[k] * (sol.u_minus(r) - sol.u_plus(r));
  }
  return num / den;
}

double e_init(const GasModel& gas, const UpstreamAtShock& up_fields,
              Vec2 grad_phi_plus, const Mat2& jac_psi, double f_theta) {
  (void)f_theta;  // evaluation point, kept for diagnostics
  Mat2 minv_pre = jac_psi.inverse();
  double c2_up = gas.gamma * up_fields.p / up_fields.rho;
  if (!(norm2(minv_pre * up_fields.grad_phi) > c2_up))
    throw NotSupersonicError("upstream state on the shock must be supersonic");
  double ks = k_s(gas, up_fields.grad_phi, grad_phi_plus, up_fields.p,
                  up_fields.rho, jac_psi);
  ShockFrame fr = shock_frame(up_fields.grad_phi, grad_phi_plus, jac_psi);
  double num = up_fields.rho * fr.qn * fr.qn + up_fields.p -
               up_fields.rho * ks;
  Mat2 minv = jac_psi.inverse();
  double head = gas.b0 - 0.5 * norm2(minv * grad_phi_plus);
  if (!(head > 0.0)) throw CavitationError("downstream speed beyond the vacuum bound");
  return num / std::pow(head, gas.gamma / (gas.gamma - 1.0));
}

}  // namespace transonic
