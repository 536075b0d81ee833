#include "transonic/radial.hpp"

#include <algorithm>
#include <cmath>

namespace transonic {

namespace {
constexpr double kSonicBand = 1e-9;
constexpr double kBernTol = 1e-9;
}  // namespace

NozzleRadial::NozzleRadial(double r0_, double r1_, int n_, double delta_)
    : r0(r0_), r1(r1_), n(n_), delta(delta_) {
  if (!(r0 > 0.0) || !(r1 > r0)) throw ValidationError("need 0 < r0 < r1");
  if (n < 2) throw ValidationError("spatial dimension must be at least 2");
  if (delta < 0.0) delta = 0.05 * (r1 - r0);
  if (!(r0 - 2.0 * delta > 0.0))
    throw ValidationError("extension margin reaches past the origin");
}

namespace {

double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& ds, double x) {
  double span = xs.back() - xs.front();
  if (x < xs.front() - 1e-12 * span || x > xs.back() + 1e-12 * span)
    throw DomainError("branch evaluated outside its radial range");
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  i = (i == 0) ? 0 : std::min(i - 1, xs.size() - 2);
  double h = xs[i + 1] - xs[i];
  double t = (x - xs[i]) / h;
  double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  double h10 = t * (1.0 - t) * (1.0 - t);
  double h01 = t * t * (3.0 - 2.0 * t);
  double h11 = t * t * (t - 1.0);
  return h00 * ys[i] + h * h10 * ds[i] + h01 * ys[i + 1] + h * h11 * ds[i + 1];
}

double hermite_deriv(const std::vector<double>& xs,
                     const std::vector<double>& ys,
                     const std::vector<double>& ds, double x) {
  double span = xs.back() - xs.front();
  if (x < xs.front() - 1e-12 * span || x > xs.back() + 1e-12 * span)
    throw DomainError("branch evaluated outside its radial range");
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  i = (i == 0) ? 0 : std::min(i - 1, xs.size() - 2);
  double h = xs[i + 1] - xs[i];
  double t = (x - xs[i]) / h;
  double g00 = 6.0 * t * (t - 1.0);
  double g10 = (1.0 - t) * (1.0 - 3.0 * t);
  double g01 = -g00;
  double g11 = t * (3.0 * t - 2.0);
  return g00 * ys[i] / h + g10 * ds[i] + g01 * ys[i + 1] / h + g11 * ds[i + 1];
}

}  // namespace

double RadialBranch::eval_u(double rq) const { return hermite(r, u, du, rq); }
double RadialBranch::eval_p(double rq) const { return hermite(r, p, dp, rq); }
double RadialBranch::eval_rho(double rq) const {
  return hermite(r, rho, drho, rq);
}
double RadialBranch::eval_du(double rq) const {
  return hermite_deriv(r, u, du, rq);
}
double RadialBranch::eval_dp(double rq) const {
  return hermite_deriv(r, p, dp, rq);
}
double RadialBranch::eval_phi(double rq) const { return hermite(r, phi, u, rq); }

OdeRhs rhs_ode(const GasModel& gas, int n, double r, double u, double p) {
  double g = gas.gamma;
  double k0 = gas.k0();
  double denom = u * u - k0;
  if (std::abs(denom) <= kSonicBand * k0)
    throw SonicSingularityError("radial system is singular at the sonic speed");
  double head = gas.b0 - 0.5 * u * u;
  double du = 2.0 * (n - 1) * (g - 1.0) * u * head / ((g + 1.0) * r * denom);
  double dp = -2.0 * (n - 1) * g * u * u * p / ((g + 1.0) * r * denom);
  return {du, dp};
}

namespace {

struct OdeState {
  double u, p, rho, phi;
};

OdeState rhs_full(const GasModel& gas, int n, double r, const OdeState& y) {
  if (!(y.u > 0.0)) throw ValidationError("radial speed must stay positive");
  if (!(y.p > 0.0)) throw CavitationError("pressure dropped to zero");
  if (!(gas.b0 - 0.5 * y.u * y.u > 0.0))
    throw CavitationError("speed reached the vacuum bound");
  OdeRhs f = rhs_ode(gas, n, r, y.u, y.p);
  double drho = -y.rho * (f.du_dr / y.u + (n - 1) / r);
  return {f.du_dr, f.dp_dr, drho, y.u};
}

}  // namespace

RadialBranch integrate_branch(const GasModel& gas, const NozzleRadial& noz,
                              double start_r, double end_r, double u0,
                              double p0, double h) {
  if (!(h > 0.0)) throw ValidationError("step must be positive");
  double rho0 = density_from_bernoulli(gas, u0, p0);
  MachClass mc = mach_class(gas, {rho0, u0, p0});
  if (mc == MachClass::Sonic)
    throw ValidationError("initial state must be strictly away from sonic");
  BranchKind kind =
      (mc == MachClass::Supersonic) ? BranchKind::Supersonic : BranchKind::Subsonic;

  RadialBranch br;
  br.kind = kind;
  double span = end_r - start_r;
  int steps = (span == 0.0)
                  ? 0
                  : std::max(1, static_cast<int>(std::ceil(std::abs(span) / h)));
  double hs = (steps == 0) ? 0.0 : span / steps;

  OdeState y{u0, p0, rho0, 0.0};
  auto push = [&](double r, const OdeState& s) {
    OdeState f = rhs_full(gas, noz.n, r, s);
    br.r.push_back(r);
    br.u.push_back(s.u);
    br.p.push_back(s.p);
    br.rho.push_back(s.rho);
    br.du.push_back(f.u);
    br.dp.push_back(f.p);
    br.drho.push_back(f.rho);
    br.phi.push_back(s.phi);
  };
  push(start_r, y);
  for (int k = 0; k < steps; ++k) {
    double r = start_r + k * hs;
    OdeState k1 = rhs_full(gas, noz.n, r, y);
    OdeState y2{y.u + 0.5 * hs * k1.u, y.p + 0.5 * hs * k1.p,
                y.rho + 0.5 * hs * k1.rho, y.phi + 0.5 * hs * k1.phi};
    OdeState k2 = rhs_full(gas, noz.n, r + 0.5 * hs, y2);
    OdeState y3{y.u + 0.5 * hs * k2.u, y.p + 0.5 * hs * k2.p,
                y.rho + 0.5 * hs * k2.rho, y.phi + 0.5 * hs * k2.phi};
    OdeState k3 = rhs_full(gas, noz.n, r + 0.5 * hs, y3);
    OdeState y4{y.u + hs * k3.u, y.p + hs * k3.p, y.rho + hs * k3.rho,
                y.phi + hs * k3.phi};
    OdeState k4 = rhs_full(gas, noz.n, r + hs, y4);
    y.u += hs / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    y.p += hs / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    y.rho += hs / 6.0 * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    y.phi += hs / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    push((k + 1 == steps) ? end_r : start_r + (k + 1) * hs, y);
  }

  if (hs < 0.0) {
    std::reverse(br.r.begin(), br.r.end());
    std::reverse(br.u.begin(), br.u.end());
    std::reverse(br.p.begin(), br.p.end());
    std::reverse(br.rho.begin(), br.rho.end());
    std::reverse(br.du.begin(), br.du.end());
    std::reverse(br.dp.begin(), br.dp.end());
    std::reverse(br.drho.begin(), br.drho.end());
    std::reverse(br.phi.begin(), br.phi.end());
  }

  // conservation and monotonicity audit of the samples
  for (std::size_t i = 0; i < br.r.size(); ++i) {
    double bern = bernoulli(gas, {br.rho[i], br.u[i], br.p[i]});
    if (std::abs(bern - gas.b0) > kBernTol * std::abs(gas.b0))
      throw StepFailureError("Bernoulli drift beyond tolerance along branch");
  }
  for (std::size_t i = 1; i < br.r.size(); ++i) {
    bool ok = (kind == BranchKind::Supersonic)
                  ? (br.u[i] > br.u[i - 1] && br.p[i] < br.p[i - 1] &&
                     br.rho[i] < br.rho[i - 1])
                  : (br.u[i] < br.u[i - 1] && br.p[i] > br.p[i - 1] &&
                     br.rho[i] > br.rho[i - 1]);
    if (!ok) throw StepFailureError("branch lost its monotonicity pattern");
  }
  return br;
}

namespace {

RadialBranch merge_branches(RadialBranch lo, const RadialBranch& hi,
                            double phi_shift_hi) {
  // hi starts where lo ends; drop the duplicated joint sample from hi
  for (std::size_t i = 1; i < hi.r.size(); ++i) {
    lo.r.push_back(hi.r[i]);
    lo.u.push_back(hi.u[i]);
    lo.p.push_back(hi.p[i]);
    lo.rho.push_back(hi.rho[i]);
    lo.du.push_back(hi.du[i]);
    lo.dp.push_back(hi.dp[i]);
    lo.drho.push_back(hi.drho[i]);
    lo.phi.push_back(hi.phi[i] + phi_shift_hi);
  }
  return lo;
}

void shift_phi(RadialBranch& br, double shift) {
  for (double& v : br.phi) v += shift;
}

}  // namespace

RadialSolution background_solution(const GasModel& gas,
                                   const NozzleRadial& noz,
                                   const FlowState& inflow, double r_s,
                                   double h) {
  if (!(noz.r0 < r_s && r_s < noz.r1))
    throw DomainError("shock radius must lie strictly inside the nozzle");
  if (std::abs(bernoulli(gas, inflow) - gas.b0) > 1e-8 * std::abs(gas.b0))
    throw ValidationError("inflow state off the Bernoulli surface");
  if (mach_class(gas, inflow) != MachClass::Supersonic)
    throw NotSupersonicError("inflow must be supersonic");
  if (h <= 0.0) h = (noz.r1 - noz.r0) / 2000.0;

  RadialSolution sol;
  sol.gas = gas;
  sol.noz = noz;
  sol.r_s = r_s;

  RadialBranch sup_lo =
      integrate_branch(gas, noz, noz.r0, r_s, inflow.u, inflow.p, h);
  FlowState at_shock{sup_lo.rho.back(), sup_lo.u.back(), sup_lo.p.back()};
  double phi_at_rs = sup_lo.phi.back();
  RadialBranch sup_hi =
      integrate_branch(gas, noz, r_s, noz.r1, at_shock.u, at_shock.p, h);
  sol.sup = merge_branches(std::move(sup_lo), sup_hi, phi_at_rs);

  sol.jump = rh_jump_radial(gas, at_shock);

  double r_lo = r_s - 2.0 * noz.delta;
  RadialBranch sub_dn = integrate_branch(gas, noz, r_s, r_lo,
                                         sol.jump.downstream.u,
                                         sol.jump.downstream.p, h);
  double phi_dn_at_rs = sub_dn.phi.back();  // phi of the joint sample
  // sub_dn is stored ascending in r; its phi was integrated from r_s downward,
  // so the value at r_s sits at the back. Align both pieces to phi(r_s).
  shift_phi(sub_dn, phi_at_rs - phi_dn_at_rs);
  RadialBranch sub_up = integrate_branch(gas, noz, r_s, noz.r1,
                                         sol.jump.downstream.u,
                                         sol.jump.downstream.p, h);
  sol.sub = merge_branches(std::move(sub_dn), sub_up, phi_at_rs);
  return sol;
}

double exit_pressure(const GasModel& gas, const NozzleRadial& noz,
                     const FlowState& inflow, double r_s) {
  RadialSolution sol = background_solution(gas, noz, inflow, r_s);
  return sol.sub.p.back();
}

double locate_shock(const GasModel& gas, const NozzleRadial& noz,
                    const FlowState& inflow, double p_c, double tol_r) {
  double dnum = 1e-6 * (noz.r1 - noz.r0);
  double lo = noz.r0 + dnum;
  double hi = noz.r1 - dnum;
  double p_max = exit_pressure(gas, noz, inflow, lo);
  double p_min = exit_pressure(gas, noz, inflow, hi);
  if (!(p_min < p_c && p_c < p_max))
    throw PressureOutOfRangeError("exit pressure target outside attainable range");
  while (hi - lo > tol_r) {
    double mid = 0.5 * (lo + hi);
    if (exit_pressure(gas, noz, inflow, mid) > p_c)
      lo = mid;  // pressure too high: shock must move outward
    else
      hi = mid;
  }
  double mid = 0.5 * (lo + hi);
  double res = std::abs(exit_pressure(gas, noz, inflow, mid) - p_c);
  if (res > 1e-6 * std::max(1.0, std::abs(p_c)))
    throw SolverDivergenceError("bisection failed to meet the pressure target");
  return mid;
}

double mu0(const GasModel& gas, const NozzleRadial& noz,
           const RadialSolution& sol) {
  double k0 = gas.k0();
  double um = sol.jump.upstream.u;
  double up = sol.jump.downstream.u;
  double num = 2.0 * (noz.n - 1) * gas.gamma * k0 /
               ((gas.gamma + 1.0) * sol.r_s * um);
  return num / (um - up);
}

double shock_pressure_slope_gap(const GasModel& gas, const NozzleRadial& noz,
                                const RadialSolution& sol) {
  double g = gas.gamma;
  double k0 = gas.k0();
  double um = sol.jump.upstream.u;
  double pm = sol.jump.upstream.p;
  double head = gas.b0 - 0.5 * um * um;
  return -(noz.n - 1) * g * pm * (um * um + (g - 1.0) / (g + 1.0) * k0) /
         ((g - 1.0) * sol.r_s * head);
}

IsentropicExit isentropic_radial_family(const GasModel& gas,
                                        const NozzleRadial& noz,
                                        double flux_const, double r_s) {
  if (!(noz.r0 < r_s && r_s < noz.r1))
    throw DomainError("shock radius must lie strictly inside the nozzle");
  if (flux_const < 0.0) throw ValidationError("mass flux must be nonnegative");
  double g = gas.gamma;
  if (flux_const == 0.0) return {0.0, std::pow(isentropic_density(gas, 0.0), g) / g};

  double w_sonic = std::sqrt(2.0 / (g + 1.0));
  double w_vac = std::sqrt(2.0 / (g - 1.0));
  auto flux = [&](double w, double r) {
    return std::pow(r, noz.n - 1) * isentropic_density(gas, w * w) * w;
  };
  // both roots must exist where they are used: the supersonic root at the
  // shock radius, the subsonic root at the exit; the shock radius dominate
  if (!(flux_const < flux(w_sonic, r_s)))
    throw NoRootError("mass flux chokes the nozzle at the shock radius");

  auto bisect = [&](double wa, double wb, double r) {
    // flux is monotone on each side of the sonic speed
    double fa = flux(wa, r) - flux_const;
    for (int it = 0; it < 200; ++it) {
      double wm = 0.5 * (wa + wb);
      double fm = flux(wm, r) - flux_const;
      if ((fm > 0.0) == (fa > 0.0)) {
        wa = wm;
        fa = fm;
      } else {
        wb = wm;
      }
      if (std::abs(wb - wa) < 1e-15 * w_vac) break;
    }
    return 0.5 * (wa + wb);
  };

  double w_sub = bisect(1e-14, w_sonic, noz.r1);
  double w_sup = bisect(w_sonic, w_vac * (1.0 - 1e-12), r_s);
  (void)w_sup;  // existence is the requirement; exit data come from the exit root
  double rho_exit = isentropic_density(gas, w_sub * w_sub);
  return {w_sub, std::pow(rho_exit, g) / g};
}

}  // namespace transonic
