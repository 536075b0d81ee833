#include "transonic/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "transonic/errors.hpp"
#include "transonic/jump.hpp"

namespace transonic {

namespace {

// straightening blend: potential-gap map near the shock, identity near the
// exit, quintic ramp between
struct Blend {
  double lo = 0.0, hi = 0.0;
  double k = 0.0;
};

Blend make_blend(const RadialSolution& sol) {
  Blend b;
  const double rs = sol.r_s, r1 = sol.noz.r1;
  b.lo = rs + (r1 - rs) / 10.0;
  b.hi = r1 - (r1 - rs) / 2.0;
  const double gap = sol.phi_minus(r1) - sol.phi_plus(r1);
  if (!(gap > 0.0))
    throw ValidationError("potential gap must be positive at the exit");
  b.k = (r1 - rs) / (8.0 * gap);
  return b;
}

double chi(const Blend& b, double r) {
  return smoothstep5((r - b.lo) / (b.hi - b.lo));
}

double chi_deriv(const Blend& b, double r) {
  return smoothstep5_deriv((r - b.lo) / (b.hi - b.lo)) / (b.hi - b.lo);
}

struct NodeKinematics {
  double r = 0.0;       // physical radius
  double ups = 0.0;     // straightened radius
  double dr_ups = 0.0;  // radial slope of the straightening
  double denom = 0.0;   // radial advection speed after straightening
  double vel_t = 0.0;   // angular velocity component
};

NodeKinematics node_kinematics(const RadialSolution& sol,
                               const SectorGrid& grid,
                               const ShockFront& front, const Field2D& psi,
                               const PerturbationData& data, const Blend& b,
                               int i, int j) {
  NodeKinematics nk;
  const double theta = grid.theta[static_cast<std::size_t>(j)];
  nk.r = node_radius(grid, front, i, j);
  const double phi = sol.phi_plus(nk.r) + psi.at(i, j);
  const Vec2 gphi =
      Vec2{sol.u_plus(nk.r), 0.0} + node_gradient(grid, front, psi, i, j);
  const double pm = data.phi_minus(sol, nk.r, theta);
  const Vec2 gpm = data.grad_phi_minus(sol, nk.r, theta);

  const double c = chi(b, nk.r);
  const double cp = chi_deriv(b, nk.r);
  const double pot = b.k * (pm - phi) + sol.r_s;
  nk.ups = pot * (1.0 - c) + nk.r * c;
  nk.dr_ups = (1.0 - c) * b.k * (gpm.x - gphi.x) + c + cp * (nk.r - pot);
  const double ups_t = (1.0 - c) * b.k * (gpm.y - gphi.y);

  const Mat2 minv = data.jac_psi(nk.r, theta).inverse();
  const Vec2 vel = minv.transpose() * (minv * gphi);
  nk.denom = nk.dr_ups * vel.x + ups_t * vel.y;
  nk.vel_t = vel.y;
  return nk;
}

// background floor of the radial advection speed, from the radial solution
double background_speed_floor(const RadialSolution& sol, const Blend& b) {
  const double rs = sol.r_s, r1 = sol.noz.r1;
  const int m = 1000;
  double dmin = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double r = rs + (r1 - rs) * i / m;
    const double c = chi(b, r);
    const double cp = chi_deriv(b, r);
    const double pot = b.k * (sol.phi_minus(r) - sol.phi_plus(r)) + rs;
    const double slope =
        (1.0 - c) * b.k * (sol.u_minus(r) - sol.u_plus(r)) + c + cp * (r - pot);
    const double d = slope * sol.u_plus(r);
    if (i == 0 || d < dmin) dmin = d;
  }
  return dmin;
}

struct TraceCore {
  double foot = 0.0;
  int steps = 0;
  double h = 0.0;
};

double slope_guarded(const CharField& cf, double x1, double th) {
  const double w = cf.w2_interp(x1, th);
  if (!std::isfinite(w) || std::abs(w) > cf.blowup_guard)
    throw StepFailureError("characteristic slope exceeds the blowup guard");
  return w;
}

TraceCore trace_core(const CharField& cf, double r, double theta,
                     double h_nominal, std::vector<double>* angles) {
  TraceCore tc;
  const double span = r - cf.r_s;
  tc.steps = span > 0.0
                 ? std::max(1, static_cast<int>(std::ceil(span / h_nominal - 1e-12)))
                 : 0;
  tc.h = tc.steps > 0 ? span / tc.steps : 0.0;
  double th = theta;
  if (angles) {
    angles->clear();
    angles->push_back(th);
  }
  for (int k = 0; k < tc.steps; ++k) {
    const double x1 = r - k * tc.h;
    const double h = tc.h;
    const double k1 = -slope_guarded(cf, x1, th);
    const double k2 = -slope_guarded(cf, x1 - 0.5 * h, th + 0.5 * h * k1);
    const double k3 = -slope_guarded(cf, x1 - 0.5 * h, th + 0.5 * h * k2);
    const double k4 = -slope_guarded(cf, x1 - h, th + h * k3);
    th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(th)) throw StepFailureError("characteristic angle is not finite");
    th = std::clamp(th, -cf.theta_half, cf.theta_half);
    if (angles) angles->push_back(th);
  }
  tc.foot = th;
  return tc;
}

}  // namespace

double CharField::w2_interp(double rt_q, double theta_q) const {
  const double hrt = (r1 - r_s) / (nr - 1);
  const double hth = 2.0 * theta_half / (nt - 1);
  double x = (rt_q - r_s) / hrt;
  double y = (theta_q + theta_half) / hth;
  x = std::clamp(x, 0.0, static_cast<double>(nr - 1));
  y = std::clamp(y, 0.0, static_cast<double>(nt - 1));
  const int i = std::min(nr - 2, static_cast<int>(x));
  const int j = std::min(nt - 2, static_cast<int>(y));
  const double fx = x - i, fy = y - j;
  return (1.0 - fx) * ((1.0 - fy) * w2_at(i, j) + fy * w2_at(i, j + 1)) +
         fx * ((1.0 - fy) * w2_at(i + 1, j) + fy * w2_at(i + 1, j + 1));
}

CharField build_char_field(const GasModel& gas, const RadialSolution& sol,
                           const SectorGrid& grid, const ShockFront& front,
                           const Field2D& psi, const PerturbationData& data,
                           double tol_bc) {
  (void)gas;
  if (psi.nr != grid.nr || psi.nt != grid.nt)
    throw ValidationError("potential increment does not match the grid");
  const Blend b = make_blend(sol);
  for (double f : front.f)
    if (!(f < b.lo))
      throw ValidationError("front reaches into the straightening ramp");

  const double floor_speed = 0.25 * background_speed_floor(sol, b);
  if (!(floor_speed > 0.0))
    throw ValidationError("background advection speed must be positive");
  const double floor_slope = (sol.noz.r1 - sol.r_s) / 16.0;

  CharField cf;
  cf.nr = grid.nr;
  cf.nt = grid.nt;
  cf.r_s = sol.r_s;
  cf.r1 = sol.noz.r1;
  cf.theta_half = grid.theta_half;
  cf.theta = grid.theta;
  cf.omega0 = floor_speed;
  cf.h_trace = (cf.r1 - cf.r_s) / 4000.0;

  const int nr = grid.nr, nt = grid.nt;
  std::vector<double> ups_all(static_cast<std::size_t>(nr) * nt);
  std::vector<double> w2_all(static_cast<std::size_t>(nr) * nt);
  std::vector<double> w2_nodes(static_cast<std::size_t>(nr) * nt);
  cf.rt.resize(static_cast<std::size_t>(nr));
  for (int i = 0; i < nr; ++i)
    cf.rt[static_cast<std::size_t>(i)] =
        cf.r_s + (cf.r1 - cf.r_s) * i / (nr - 1);
  cf.rt[0] = cf.r_s;
  cf.rt[static_cast<std::size_t>(nr - 1)] = cf.r1;

  double slope_min = 0.0, wmax = 0.0;
  bool first = true;
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nr; ++i) {
      const NodeKinematics nk =
          node_kinematics(sol, grid, front, psi, data, b, i, j);
      if (!(nk.dr_ups >= floor_slope))
        throw RadialFloorError("straightening slope falls below its floor");
      if (!(nk.denom >= floor_speed))
        throw RadialFloorError("radial advection speed falls below its floor");
      if (first || nk.dr_ups < slope_min) slope_min = nk.dr_ups;
      first = false;
      const std::size_t at = static_cast<std::size_t>(i) * nt + j;
      ups_all[at] = nk.ups;
      w2_all[at] = (nk.vel_t / nk.r) / nk.denom;
      wmax = std::max(wmax, std::abs(w2_all[at]));
    }
  }

  // the wall rows must slip-align up to the discretization scale of the
  // slope field; snap them to exact zero afterwards
  const double wall_tol = tol_bc * (1.0 + wmax);
  for (int j : {0, nt - 1}) {
    for (int i = 0; i < nr; ++i) {
      double& w = w2_all[static_cast<std::size_t>(i) * nt + j];
      if (std::abs(w) > wall_tol)
        throw ValidationError("wall slip violated by the advecting field");
      w = 0.0;
    }
  }

  std::vector<double> ups_col(static_cast<std::size_t>(nr));
  std::vector<double> w2_col(static_cast<std::size_t>(nr));
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nr; ++i) {
      ups_col[static_cast<std::size_t>(i)] = ups_all[static_cast<std::size_t>(i) * nt + j];
      w2_col[static_cast<std::size_t>(i)] = w2_all[static_cast<std::size_t>(i) * nt + j];
    }
    for (int i = 0; i + 1 < nr; ++i)
      if (!(ups_col[static_cast<std::size_t>(i) + 1] >
            ups_col[static_cast<std::size_t>(i)]))
        throw RadialFloorError("straightening loses monotonicity");

    // resample the slope onto the uniform straightened radii
    for (int kq = 0; kq < nr; ++kq) {
      double q = cf.rt[static_cast<std::size_t>(kq)];
      q = std::clamp(q, ups_col.front(), ups_col.back());
      const auto it = std::upper_bound(ups_col.begin(), ups_col.end(), q);
      const int hi = std::clamp(static_cast<int>(it - ups_col.begin()), 1, nr - 1);
      const int lo = hi - 1;
      const double a = ups_col[static_cast<std::size_t>(lo)];
      const double c = ups_col[static_cast<std::size_t>(hi)];
      const double f = (q - a) / (c - a);
      w2_nodes[static_cast<std::size_t>(kq) * nt + j] =
          (1.0 - f) * w2_col[static_cast<std::size_t>(lo)] +
          f * w2_col[static_cast<std::size_t>(hi)];
    }
  }
  cf.w2 = std::move(w2_nodes);
  cf.slope_min = slope_min;
  cf.blowup_guard = 1000.0 * (1.0 + wmax);
  return cf;
}

Characteristic trace_characteristic(const CharField& field, double r,
                                    double theta) {
  const double slack = 1e-12 * (field.r1 - field.r_s);
  if (!(r >= field.r_s - slack && r <= field.r1 + slack))
    throw DomainError("trace start radius outside the straightened domain");
  if (!(std::abs(theta) <= field.theta_half + 1e-12))
    throw DomainError("trace start angle outside the sector");
  r = std::clamp(r, field.r_s, field.r1);
  theta = std::clamp(theta, -field.theta_half, field.theta_half);

  std::vector<double> angles;
  const TraceCore tc = trace_core(field, r, theta, field.h_trace, &angles);

  Characteristic ch;
  ch.x2 = std::move(angles);
  ch.x1.resize(ch.x2.size());
  ch.t.resize(ch.x2.size());
  for (std::size_t k = 0; k < ch.x1.size(); ++k) {
    // the radius leg is defined through the parameter so the linearity
    // invariant holds to the last bit
    ch.t[k] = (k + 1 == ch.x1.size() && tc.steps > 0)
                  ? 2.0 * r - field.r_s
                  : r + static_cast<double>(k) * tc.h;
    ch.x1[k] = 2.0 * r - ch.t[k];
  }
  ch.source = tc.foot;
  return ch;
}

double trace_halving_gap(const CharField& field, double r, double theta) {
  r = std::clamp(r, field.r_s, field.r1);
  theta = std::clamp(theta, -field.theta_half, field.theta_half);
  const double f1 = trace_core(field, r, theta, field.h_trace, nullptr).foot;
  const double f2 = trace_core(field, r, theta, 0.5 * field.h_trace, nullptr).foot;
  return std::abs(f1 - f2);
}

Field2D transport_E(const CharField& field,
                    const std::function<double(double)>& e_init_fn,
                    bool parallel) {
  Field2D e(Field2D::Quantity::E, field.nr, field.nt);
  const int nt = field.nt;
  parallel_for(field.nr * field.nt, parallel, [&](int n) {
    const int i = n / nt, j = n % nt;
    const double th = field.theta[static_cast<std::size_t>(j)];
    if (i == 0) {
      e.at(i, j) = e_init_fn(th);
      return;
    }
    const double foot =
        trace_core(field, field.rt[static_cast<std::size_t>(i)], th,
                   field.h_trace, nullptr)
            .foot;
    e.at(i, j) = e_init_fn(foot);
  });
  return e;
}

CubicCurve e_init_curve(const GasModel& gas, const RadialSolution& sol,
                        const SectorGrid& grid, const ShockFront& front,
                        const Field2D& psi, const PerturbationData& data) {
  const int nt = grid.nt;
  std::vector<double> val(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) {
    const double theta = grid.theta[static_cast<std::size_t>(j)];
    const double f = front.f[static_cast<std::size_t>(j)];
    UpstreamAtShock up;
    up.grad_phi = data.grad_phi_minus(sol, f, theta);
    up.p = data.p_minus(sol, f, theta);
    up.rho = data.rho_minus(sol, f, theta);
    const Vec2 gp =
        Vec2{sol.u_plus(f), 0.0} + node_gradient(grid, front, psi, 0, j);
    val[static_cast<std::size_t>(j)] =
        e_init(gas, up, gp, data.jac_psi(f, theta), f);
  }
  std::vector<double> dv(static_cast<std::size_t>(nt));
  const double h2 = 2.0 * grid.ht;
  for (int j = 0; j < nt; ++j) {
    if (j == 0)
      dv[0] = (-3.0 * val[0] + 4.0 * val[1] - val[2]) / h2;
    else if (j == nt - 1)
      dv[static_cast<std::size_t>(j)] =
          (3.0 * val[static_cast<std::size_t>(j)] -
           4.0 * val[static_cast<std::size_t>(j) - 1] +
           val[static_cast<std::size_t>(j) - 2]) /
          h2;
    else
      dv[static_cast<std::size_t>(j)] = (val[static_cast<std::size_t>(j) + 1] -
                                         val[static_cast<std::size_t>(j) - 1]) /
                                        h2;
  }
  return CubicCurve(grid.theta, std::move(val), std::move(dv));
}

Field2D reconstruct_pressure(const GasModel& gas, const RadialSolution& sol,
                             const SectorGrid& grid, const ShockFront& front,
                             const Field2D& psi, const PerturbationData& data,
                             const CharField& field, const Field2D& e_field) {
  if (psi.nr != grid.nr || psi.nt != grid.nt)
    throw ValidationError("potential increment does not match the grid");
  if (e_field.nr != field.nr || e_field.nt != field.nt ||
      field.nt != grid.nt)
    throw ValidationError("transported field does not match the grids");
  const Blend b = make_blend(sol);
  const double expo = gas.gamma / (gas.gamma - 1.0);
  const double hrt = (field.r1 - field.r_s) / (field.nr - 1);

  Field2D p(Field2D::Quantity::p, grid.nr, grid.nt);
  for (int j = 0; j < grid.nt; ++j) {
    for (int i = 0; i < grid.nr; ++i) {
      const NodeKinematics nk =
          node_kinematics(sol, grid, front, psi, data, b, i, j);
      const double theta = grid.theta[static_cast<std::size_t>(j)];
      const Vec2 gphi = Vec2{sol.u_plus(nk.r), 0.0} +
                        node_gradient(grid, front, psi, i, j);
      const Vec2 q = data.jac_psi(nk.r, theta).inverse() * gphi;
      const double head = gas.b0 - 0.5 * q.norm2();
      if (!(head > 0.0))
        throw CavitationError("reconstructed state exhausts the head");

      double x = (std::clamp(nk.ups, field.r_s, field.r1) - field.r_s) / hrt;
      const int lo = std::min(field.nr - 2, static_cast<int>(x));
      const double fx = x - lo;
      const double ev = (1.0 - fx) * e_field.at(lo, j) +
                        fx * e_field.at(lo + 1, j);
      if (!(ev > 0.0))
        throw ValidationError("transported quantity must stay positive");
      p.at(i, j) = std::pow(head, expo) * ev;
    }
  }
  return p;
}

}  // namespace transonic
