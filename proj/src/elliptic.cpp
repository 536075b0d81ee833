#include "transonic/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "transonic/errors.hpp"
#include "transonic/jump.hpp"
#include "transonic/util.hpp"

namespace transonic {

namespace {

// small linear functional of the unknown vector, plus a constant
struct LinExpr {
  std::vector<std::pair<int, double>> t;
  double c = 0.0;

  void add(int k, double v) {
    for (auto& kv : t) {
      if (kv.first == k) {
        kv.second += v;
        return;
      }
    }
    t.emplace_back(k, v);
  }
  void axpy(double a, const LinExpr& e) {
    for (const auto& kv : e.t) add(kv.first, a * kv.second);
    c += a * e.c;
  }
};

double eval(const LinExpr& e, const std::vector<double>& w) {
  double s = e.c;
  for (const auto& kv : e.t) s += kv.second * w[static_cast<std::size_t>(kv.first)];
  return s;
}

// mapped radius derivative in theta at a node or edge of the flattened sector
struct MapGeom {
  double s = 1.0;  // radial stretch
  double r = 0.0;  // physical radius
  double m = 0.0;  // shear entry of the gradient map
};

MapGeom geom_at(const SectorGrid& g, double f, double fp, double rho) {
  MapGeom mg;
  mg.s = (g.r1 - f) / (g.r1 - g.r_s);
  mg.r = f + (rho - g.r_s) * mg.s;
  mg.m = -(fp / mg.s) * (g.r1 - rho) / (g.r1 - g.r_s);
  return mg;
}

// physical polar gradient from mapped derivatives
Vec2 physical_gradient(const MapGeom& mg, double wr, double wt) {
  return {wr / mg.s, (mg.m * wr + wt) / mg.r};
}

double pot_density(const GasModel& gas, double q2) {
  const double head = gas.b0 - 0.5 * q2;
  if (head <= 0.0) throw CavitationError("stagnation head exhausted in coefficient");
  return std::pow(head, 1.0 / (gas.gamma - 1.0));
}

// momentum flux of the potential system, undeformed metric
Vec2 flux_identity(const GasModel& gas, Vec2 g) {
  return pot_density(gas, g.norm2()) * g;
}

// momentum flux seen through an analytic deformation with Jacobian m
Vec2 flux_deformed(const GasModel& gas, const Mat2& m, Vec2 g) {
  const double det = m.det();
  if (det <= 0.0) throw ValidationError("deformation Jacobian must preserve orientation");
  const Mat2 minv = m.inverse();
  const Vec2 gm = minv * g;
  return det * pot_density(gas, gm.norm2()) * (minv.transpose() * gm);
}

// defect flux between undeformed and deformed metrics at the same gradient
Vec2 defect_flux(const GasModel& gas, const Mat2& jac, Vec2 grad_phi) {
  const Vec2 fi = flux_identity(gas, grad_phi);
  const Vec2 fd = flux_deformed(gas, jac, grad_phi);
  return fi - fd;
}

struct MappedCoeff {
  double rr = 0.0, rt = 0.0, tt = 0.0;
};

MappedCoeff map_coeff(const Mat2& a, const MapGeom& g) {
  MappedCoeff mc;
  mc.rr = g.r * a.a / g.s + 2.0 * a.b * g.m + g.s * a.d * g.m * g.m / g.r;
  mc.rt = a.b + g.s * a.d * g.m / g.r;
  mc.tt = g.s * a.d / g.r;
  return mc;
}

// one-sided second order at the walls, central inside
LinExpr dtheta_expr(const SectorGrid& g, int i, int j) {
  LinExpr e;
  const double h2 = 2.0 * g.ht;
  if (j == 0) {
    e.add(g.idx(i, 0), -3.0 / h2);
    e.add(g.idx(i, 1), 4.0 / h2);
    e.add(g.idx(i, 2), -1.0 / h2);
  } else if (j == g.nt - 1) {
    e.add(g.idx(i, j), 3.0 / h2);
    e.add(g.idx(i, j - 1), -4.0 / h2);
    e.add(g.idx(i, j - 2), 1.0 / h2);
  } else {
    e.add(g.idx(i, j + 1), 1.0 / h2);
    e.add(g.idx(i, j - 1), -1.0 / h2);
  }
  return e;
}

LinExpr drho_expr(const SectorGrid& g, int i, int j) {
  LinExpr e;
  const double h2 = 2.0 * g.hr;
  if (i == 0) {
    e.add(g.idx(0, j), -3.0 / h2);
    e.add(g.idx(1, j), 4.0 / h2);
    e.add(g.idx(2, j), -1.0 / h2);
  } else if (i == g.nr - 1) {
    e.add(g.idx(i, j), 3.0 / h2);
    e.add(g.idx(i - 1, j), -4.0 / h2);
    e.add(g.idx(i - 2, j), 1.0 / h2);
  } else {
    e.add(g.idx(i + 1, j), 1.0 / h2);
    e.add(g.idx(i - 1, j), -1.0 / h2);
  }
  return e;
}

struct ProblemRefs {
  const GasModel& gas;
  const RadialSolution& sol;
  const SectorGrid& grid;
  const ShockFront& front;
  const std::vector<double>& frozen;
  const PerturbationData& data;
};

// combined defect flux through the radial edge between (i,j) and (i+1,j);
// constant part carries the frozen-state datum with opposite sign
LinExpr rho_edge_flux(const ProblemRefs& pr, int i, int j) {
  const SectorGrid& g = pr.grid;
  const double theta = g.theta[static_cast<std::size_t>(j)];
  const double f = pr.front.f[static_cast<std::size_t>(j)];
  const double fp = pr.front.df[static_cast<std::size_t>(j)];
  const MapGeom mg = geom_at(g, f, fp, g.rho[static_cast<std::size_t>(i)] + 0.5 * g.hr);

  LinExpr wr;
  wr.add(g.idx(i + 1, j), 1.0 / g.hr);
  wr.add(g.idx(i, j), -1.0 / g.hr);
  LinExpr wt;
  wt.axpy(0.5, dtheta_expr(g, i, j));
  wt.axpy(0.5, dtheta_expr(g, i + 1, j));

  const Vec2 eta = physical_gradient(mg, eval(wr, pr.frozen), eval(wt, pr.frozen));
  const Mat2 a = coeff_a(pr.gas, pr.sol, mg.r, eta, g.ellipticity_floor);
  const MappedCoeff mc = map_coeff(a, mg);

  LinExpr h;
  h.axpy(mc.rr, wr);
  h.axpy(mc.rt, wt);

  const Vec2 gphi = Vec2{pr.sol.u_plus(mg.r), 0.0} + eta;
  const Vec2 fdef = defect_flux(pr.gas, pr.data.jac_psi(mg.r, theta), gphi);
  h.c -= mg.r * fdef.x + mg.s * mg.m * fdef.y;
  return h;
}

// combined defect flux through the angular edge between (i,j) and (i,j+1)
LinExpr theta_edge_flux(const ProblemRefs& pr, int i, int j) {
  const SectorGrid& g = pr.grid;
  const double theta = g.theta[static_cast<std::size_t>(j)] + 0.5 * g.ht;
  const double f = 0.5 * (pr.front.f[static_cast<std::size_t>(j)] +
                          pr.front.f[static_cast<std::size_t>(j) + 1]);
  const double fp = (pr.front.f[static_cast<std::size_t>(j) + 1] -
                     pr.front.f[static_cast<std::size_t>(j)]) /
                    g.ht;
  const MapGeom mg = geom_at(g, f, fp, g.rho[static_cast<std::size_t>(i)]);

  LinExpr wt;
  wt.add(g.idx(i, j + 1), 1.0 / g.ht);
  wt.add(g.idx(i, j), -1.0 / g.ht);
  LinExpr wr;
  wr.axpy(0.5, drho_expr(g, i, j));
  wr.axpy(0.5, drho_expr(g, i, j + 1));

  const Vec2 eta = physical_gradient(mg, eval(wr, pr.frozen), eval(wt, pr.frozen));
  const Mat2 a = coeff_a(pr.gas, pr.sol, mg.r, eta, g.ellipticity_floor);
  const MappedCoeff mc = map_coeff(a, mg);

  LinExpr h;
  h.axpy(mc.rt, wr);
  h.axpy(mc.tt, wt);

  const Vec2 gphi = Vec2{pr.sol.u_plus(mg.r), 0.0} + eta;
  const Vec2 fdef = defect_flux(pr.gas, pr.data.jac_psi(mg.r, theta), gphi);
  h.c -= mg.s * fdef.y;
  return h;
}

// frozen physical gradient of the full perturbation at a node
Vec2 node_eta(const ProblemRefs& pr, int i, int j) {
  const SectorGrid& g = pr.grid;
  const double f = pr.front.f[static_cast<std::size_t>(j)];
  const double fp = pr.front.df[static_cast<std::size_t>(j)];
  const MapGeom mg = geom_at(g, f, fp, g.rho[static_cast<std::size_t>(i)]);
  const double wr = eval(drho_expr(g, i, j), pr.frozen);
  const double wt = eval(dtheta_expr(g, i, j), pr.frozen);
  return physical_gradient(mg, wr, wt);
}

struct ShockNodeState {
  double g1 = 0.0;        // oblique datum for the linear row
  double b1_dot_nu = 1.0; // transversality margin of the oblique vector
};

// averaged projection d_eta of the unit normal map along the straightening path
Mat2 normal_eta_average(Vec2 z0, Vec2 eta) {
  const Quad8 q = gauss8();
  Mat2 acc{0.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < 8; ++k) {
    const Vec2 z = z0 - q.t[k] * eta;
    const double zn = z.norm();
    if (zn < 1e-14) throw DegenerateShockError("normal map degenerates along homotopy");
    const Vec2 nu = (1.0 / zn) * z;
    const Mat2 proj = Mat2::identity() - outer(nu, nu);
    acc = acc + (-q.w[k] / zn) * proj;
  }
  return acc;
}

ShockNodeState shock_node_state(const ProblemRefs& pr, int j, double mu_f_j) {
  const GasModel& gas = pr.gas;
  const RadialSolution& sol = pr.sol;
  const SectorGrid& g = pr.grid;
  const double theta = g.theta[static_cast<std::size_t>(j)];
  const double f = pr.front.f[static_cast<std::size_t>(j)];
  const double fp = pr.front.df[static_cast<std::size_t>(j)];

  const Vec2 eta = node_eta(pr, 0, j);
  const double u0p = sol.u_plus(f);
  const double u0m = sol.u_minus(f);
  const Vec2 grad_phi = Vec2{u0p, 0.0} + eta;

  const Vec2 grad_phi_m = pr.data.grad_phi_minus(sol, f, theta);
  const double pm = pr.data.p_minus(sol, f, theta);
  const double rm = pr.data.rho_minus(sol, f, theta);
  const Mat2 jac = pr.data.jac_psi(f, theta);

  const Vec2 d = grad_phi_m - grad_phi;
  const double dn = d.norm();
  if (dn < 1e-12 * (grad_phi_m.norm() + grad_phi.norm() + 1.0))
    throw DegenerateShockError("upstream and downstream gradients coincide");
  const Vec2 nu_s = (1.0 / dn) * d;

  const Mat2 minv = jac.inverse();
  const double corr = dn / (minv * d).norm();
  const Mat2 q2m = minv.transpose() * minv;
  const double qn_minus = corr * dot(q2m * grad_phi_m, nu_s);
  const double qn_plus = corr * dot(q2m * grad_phi, nu_s);
  if (qn_minus <= 0.0) throw NotSupersonicError("upstream normal speed lost its sign");

  const double ks = k_s(gas, grad_phi_m, grad_phi, pm, rm, jac);

  const double a1 = dot(grad_phi, Vec2{1.0, 0.0}) - qn_plus;
  const double a2 = gas.k0() / u0m - ks / qn_minus;
  const double psi_m = pr.data.phi_minus(sol, f, theta) - sol.phi_minus(f);

  ShockNodeState st;
  st.g1 = (a1 - a2) - mu_f_j * psi_m;

  // transversality of the oblique derivative for the linearized condition
  const Vec2 z0{u0m - u0p, 0.0};
  const Mat2 j2 = normal_eta_average(z0, eta);
  const Vec2 beta1 = -1.0 * (j2 * grad_phi);
  const Vec2 tang{0.0, eta.y};
  const double dnorm2 = d.norm2();
  Vec2 beta2 = ((gas.gamma - 1.0) * u0m / ((gas.gamma + 1.0) * dnorm2)) * tang;
  beta2 = beta2 + (ks / qn_minus) * (j2 * Vec2{1.0, 0.0});
  const Vec2 b1 = Vec2{1.0, 0.0} - beta1 + beta2;
  const Vec2 nu_front_raw{1.0, -fp / f};
  const Vec2 nu_front = (1.0 / nu_front_raw.norm()) * nu_front_raw;
  st.b1_dot_nu = dot(b1, nu_front);
  return st;
}

struct RowsBuild {
  std::vector<LinExpr> eq;
  std::vector<double> rhs;
  double min_b1 = 1.0;
};

RowsBuild build_rows(const ProblemRefs& pr, bool parallel) {
  const SectorGrid& g = pr.grid;
  const int nr = g.nr, nt = g.nt;
  const int n = nr * nt;
  RowsBuild rb;
  rb.eq.resize(static_cast<std::size_t>(n));
  rb.rhs.assign(static_cast<std::size_t>(n), 0.0);

  std::vector<double> mu(static_cast<std::size_t>(nt), 0.0);
  for (int j = 0; j < nt; ++j)
    mu[static_cast<std::size_t>(j)] = mu_f(pr.gas, pr.sol, pr.front.f[static_cast<std::size_t>(j)]);

  std::vector<double> b1_margin(static_cast<std::size_t>(nt), 1.0);
  const double vc = background_exit_flux(pr.gas, pr.sol);

  parallel_for(n, parallel, [&](int row) {
    const int i = row / nt;
    const int j = row % nt;
    LinExpr& eq = rb.eq[static_cast<std::size_t>(row)];
    double& rhs = rb.rhs[static_cast<std::size_t>(row)];

    if (i == 0) {
      // linearized oblique shock condition on the flattened front
      const double f = pr.front.f[static_cast<std::size_t>(j)];
      const double s = (g.r1 - f) / (g.r1 - g.r_s);
      eq.axpy(1.0 / s, drho_expr(g, 0, j));
      eq.add(g.idx(0, j), -mu[static_cast<std::size_t>(j)]);
      const ShockNodeState st = shock_node_state(pr, j, mu[static_cast<std::size_t>(j)]);
      b1_margin[static_cast<std::size_t>(j)] = st.b1_dot_nu;
      rhs = st.g1;
      return;
    }
    if (i == nr - 1) {
      // prescribed exit flux, defect form
      const double theta = g.theta[static_cast<std::size_t>(j)];
      const double f = pr.front.f[static_cast<std::size_t>(j)];
      const double fp = pr.front.df[static_cast<std::size_t>(j)];
      const MapGeom mg = geom_at(g, f, fp, g.rho[static_cast<std::size_t>(nr - 1)]);
      const Vec2 eta = node_eta(pr, nr - 1, j);
      const Mat2 a = coeff_a(pr.gas, pr.sol, mg.r, eta, g.ellipticity_floor);
      LinExpr gr = drho_expr(g, nr - 1, j);
      LinExpr gt = dtheta_expr(g, nr - 1, j);
      // physical normal component of the linearized flux; shear vanishes at the exit
      eq.axpy(a.a / mg.s, gr);
      eq.axpy(a.b / mg.r, gt);
      const Vec2 gphi = Vec2{pr.sol.u_plus(mg.r), 0.0} + eta;
      const Vec2 fdef = defect_flux(pr.gas, pr.data.jac_psi(mg.r, theta), gphi);
      rhs = (pr.data.vex(theta, vc) - vc) + fdef.x;
      return;
    }

    // radial edge fluxes around (i,j)
    LinExpr hlo = rho_edge_flux(pr, i - 1, j);
    LinExpr hhi = rho_edge_flux(pr, i, j);
    eq.axpy(1.0 / g.hr, hhi);
    eq.axpy(-1.0 / g.hr, hlo);

    if (j == 0) {
      // wall rows: combined flux is odd across the wall
      LinExpr ht = theta_edge_flux(pr, i, 0);
      eq.axpy(2.0 / g.ht, ht);
    } else if (j == nt - 1) {
      LinExpr ht = theta_edge_flux(pr, i, nt - 2);
      eq.axpy(-2.0 / g.ht, ht);
    } else {
      LinExpr tlo = theta_edge_flux(pr, i, j - 1);
      LinExpr thi = theta_edge_flux(pr, i, j);
      eq.axpy(1.0 / g.ht, thi);
      eq.axpy(-1.0 / g.ht, tlo);
    }
    rhs = 0.0;
  });

  double mb = 1.0;
  for (double v : b1_margin) mb = std::min(mb, v);
  rb.min_b1 = mb;
  if (mb < 0.5)
    throw ObliquenessError("oblique shock derivative lost transversality with the front");
  return rb;
}

void check_dims(const SectorGrid& g, const ShockFront& front, const Field2D& frozen) {
  if (front.f.size() != static_cast<std::size_t>(g.nt) ||
      front.df.size() != static_cast<std::size_t>(g.nt))
    throw ValidationError("front sample count does not match the grid");
  if (frozen.nr != g.nr || frozen.nt != g.nt)
    throw ValidationError("field dimensions do not match the grid");
  for (double fv : front.f) {
    if (!(fv > g.r_s - 0.5 * (g.r1 - g.r_s) && fv < g.r1))
      throw ValidationError("front sample outside the admissible band");
  }
}

LinearSystem finalize_system(const GasModel& gas, const RadialSolution& sol,
                             const SectorGrid& grid, RowsBuild& rb) {
  const int n = grid.nr * grid.nt;
  LinearSystem sys;
  sys.n = n;
  sys.nr = grid.nr;
  sys.nt = grid.nt;
  sys.rowptr.resize(static_cast<std::size_t>(n) + 1, 0);
  std::size_t nnz = 0;
  for (int row = 0; row < n; ++row) nnz += rb.eq[static_cast<std::size_t>(row)].t.size();
  sys.col.reserve(nnz);
  sys.val.reserve(nnz);
  sys.rhs.resize(static_cast<std::size_t>(n));
  for (int row = 0; row < n; ++row) {
    LinExpr& e = rb.eq[static_cast<std::size_t>(row)];
    std::sort(e.t.begin(), e.t.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& kv : e.t) {
      sys.col.push_back(kv.first);
      sys.val.push_back(kv.second);
    }
    sys.rowptr[static_cast<std::size_t>(row) + 1] = static_cast<int>(sys.col.size());
    sys.rhs[static_cast<std::size_t>(row)] = rb.rhs[static_cast<std::size_t>(row)] - e.c;
  }
  sys.flux_scale = std::max(1.0, std::pow(grid.r1, static_cast<double>(sol.noz.n) - 1.0) *
                                     background_exit_flux(gas, sol));
  return sys;
}

// per-class residual of a candidate field under an already assembled system
FbpResiduals class_residuals(const LinearSystem& sys, const SectorGrid& grid,
                             const Field2D& psi) {
  FbpResiduals res;
  const int nt = grid.nt;
  for (int row = 0; row < sys.n; ++row) {
    double r = -sys.rhs[static_cast<std::size_t>(row)];
    for (int k = sys.rowptr[static_cast<std::size_t>(row)];
         k < sys.rowptr[static_cast<std::size_t>(row) + 1]; ++k)
      r += sys.val[static_cast<std::size_t>(k)] *
           psi.v[static_cast<std::size_t>(sys.col[static_cast<std::size_t>(k)])];
    const double ar = std::abs(r) / sys.flux_scale;
    const int i = row / nt;
    const int j = row % nt;
    if (i == 0)
      res.shock = std::max(res.shock, ar);
    else if (i == grid.nr - 1)
      res.exit = std::max(res.exit, ar);
    else if (j == 0 || j == nt - 1)
      res.wall = std::max(res.wall, ar);
    else
      res.pde = std::max(res.pde, ar);
  }
  return res;
}

double phi_jump_residual(const RadialSolution& sol, const SectorGrid& grid,
                         const ShockFront& front, const Field2D& psi,
                         const PerturbationData& data) {
  const double denom =
      (sol.jump.upstream.u - sol.jump.downstream.u) * (grid.r1 - grid.r_s);
  double worst = 0.0;
  for (int j = 0; j < grid.nt; ++j) {
    const double theta = grid.theta[static_cast<std::size_t>(j)];
    const double fj = front.f[static_cast<std::size_t>(j)];
    const double gap = data.phi_minus(sol, fj, theta) - (sol.phi_plus(fj) + psi.at(0, j));
    worst = std::max(worst, std::abs(gap) / denom);
  }
  return worst;
}

}  // namespace

double Field2D::norm_inf() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double FbpResiduals::max() const {
  double m = pde;
  m = std::max(m, shock);
  m = std::max(m, wall);
  m = std::max(m, exit);
  m = std::max(m, phi_jump);
  return m;
}

double cos_mode(int j, double theta, double theta_half) {
  const double full = 2.0 * theta_half;
  return std::cos(j * kPi * (theta + theta_half) / full);
}

double cos_mode_deriv(int j, double theta, double theta_half) {
  const double full = 2.0 * theta_half;
  const double k = j * kPi / full;
  return -k * std::sin(j * kPi * (theta + theta_half) / full);
}

Mat2 PerturbationData::jac_psi(double r, double theta) const {
  (void)r;
  if (psi_family == "identity" || psi_amp == 0.0) return Mat2::identity();
  if (psi_family != "radial_bump")
    throw ValidationError("unknown deformation family: " + psi_family);
  const double b = cos_mode(psi_mode, theta, theta_half);
  const double bp = cos_mode_deriv(psi_mode, theta, theta_half);
  const double scale = 1.0 + psi_amp * b;
  if (scale <= 0.0) throw ValidationError("deformation amplitude collapses the radius");
  return Mat2{scale, psi_amp * bp, 0.0, scale};
}

double PerturbationData::phi_minus(const RadialSolution& sol, double r, double theta) const {
  return sol.phi_minus(r) + up_phi_amp * cos_mode(up_phi_mode, theta, theta_half);
}

Vec2 PerturbationData::grad_phi_minus(const RadialSolution& sol, double r, double theta) const {
  return {sol.u_minus(r), up_phi_amp * cos_mode_deriv(up_phi_mode, theta, theta_half) / r};
}

double PerturbationData::p_minus(const RadialSolution& sol, double r, double theta) const {
  return sol.p_minus(r) * (1.0 + up_p_amp * cos_mode(up_p_mode, theta, theta_half));
}

double PerturbationData::rho_minus(const RadialSolution& sol, double r, double theta) const {
  const GasModel& gas = sol.gas;
  const Mat2 minv = jac_psi(r, theta).inverse();
  const Vec2 q = minv * grad_phi_minus(sol, r, theta);
  const double p = p_minus(sol, r, theta);
  if (p <= 0.0) throw ValidationError("perturbed upstream pressure must stay positive");
  const double head = gas.b0 - 0.5 * q.norm2();
  if (head <= 0.0) throw CavitationError("perturbed upstream state exhausts the head");
  return gas.gamma * p / ((gas.gamma - 1.0) * head);
}

double PerturbationData::vex(double theta, double v_c) const {
  double v = v_c;
  for (std::size_t j = 0; j < vex_coeff.size(); ++j)
    v += vex_coeff[j] * cos_mode(static_cast<int>(j), theta, theta_half);
  return v;
}

double PerturbationData::amplitude() const {
  double a = std::abs(psi_amp) + std::abs(up_phi_amp) + std::abs(up_p_amp);
  for (double c : vex_coeff) a += std::abs(c);
  return a;
}

double background_exit_flux(const GasModel& gas, const RadialSolution& sol) {
  const double u = sol.u_plus(sol.noz.r1);
  return pot_density(gas, u * u) * u;
}

double coeff_k1(const GasModel& gas, const RadialSolution& sol, double r) {
  const double gm1 = gas.gamma - 1.0;
  const double u = sol.u_plus(r);
  const double head = gas.b0 - 0.5 * u * u;
  if (head <= 0.0) throw CavitationError("background head vanished inside the sector");
  const double nn = static_cast<double>(sol.noz.n);
  return (gas.gamma + 1.0) * std::pow(r, nn - 1.0) * (gas.k0() - u * u) *
         std::pow(head, (2.0 - gas.gamma) / gm1) / (2.0 * gm1);
}

double coeff_k2(const GasModel& gas, const RadialSolution& sol, double r) {
  const double gm1 = gas.gamma - 1.0;
  const double u = sol.u_plus(r);
  const double head = gas.b0 - 0.5 * u * u;
  if (head <= 0.0) throw CavitationError("background head vanished inside the sector");
  const double nn = static_cast<double>(sol.noz.n);
  return std::pow(r, nn - 3.0) * std::pow(head, 1.0 / gm1);
}

Vec2 node_gradient(const SectorGrid& grid, const ShockFront& front,
                   const Field2D& w, int i, int j) {
  if (w.nr != grid.nr || w.nt != grid.nt)
    throw ValidationError("field does not match the grid");
  const double f = front.f[static_cast<std::size_t>(j)];
  const double fp = front.df[static_cast<std::size_t>(j)];
  const MapGeom mg = geom_at(grid, f, fp, grid.rho[static_cast<std::size_t>(i)]);
  const double wr = eval(drho_expr(grid, i, j), w.v);
  const double wt = eval(dtheta_expr(grid, i, j), w.v);
  return physical_gradient(mg, wr, wt);
}

double node_radius(const SectorGrid& grid, const ShockFront& front, int i, int j) {
  const double f = front.f[static_cast<std::size_t>(j)];
  const double fp = front.df[static_cast<std::size_t>(j)];
  return geom_at(grid, f, fp, grid.rho[static_cast<std::size_t>(i)]).r;
}

SectorGrid make_sector_grid(const GasModel& gas, const RadialSolution& sol,
                            int nr, int nt, double theta_full) {
  if (nr < 5 || nt < 5) throw ValidationError("sector grid needs at least 5 nodes per direction");
  if (!(theta_full > 0.0 && theta_full <= kPi))
    throw ValidationError("sector opening must lie in (0, pi]");
  SectorGrid g;
  g.nr = nr;
  g.nt = nt;
  g.r_s = sol.r_s;
  g.r1 = sol.noz.r1;
  g.theta_half = 0.5 * theta_full;
  g.hr = (g.r1 - g.r_s) / (nr - 1);
  g.ht = theta_full / (nt - 1);
  g.rho.resize(static_cast<std::size_t>(nr));
  for (int i = 0; i < nr; ++i)
    g.rho[static_cast<std::size_t>(i)] = (i == nr - 1) ? g.r1 : g.r_s + i * g.hr;
  g.theta.resize(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j)
    g.theta[static_cast<std::size_t>(j)] =
        (j == nt - 1) ? g.theta_half : -g.theta_half + j * g.ht;

  g.k1.resize(static_cast<std::size_t>(nr));
  g.k2.resize(static_cast<std::size_t>(nr));
  g.omega1.resize(static_cast<std::size_t>(nr));
  double floor = 0.0;
  bool first = true;
  for (int i = 0; i < nr; ++i) {
    const double r = g.rho[static_cast<std::size_t>(i)];
    const double nn = static_cast<double>(sol.noz.n);
    g.omega1[static_cast<std::size_t>(i)] = std::pow(r, nn - 1.0);
    g.k1[static_cast<std::size_t>(i)] = coeff_k1(gas, sol, r);
    g.k2[static_cast<std::size_t>(i)] = coeff_k2(gas, sol, r);
    if (g.k1[static_cast<std::size_t>(i)] <= 0.0 || g.k2[static_cast<std::size_t>(i)] <= 0.0)
      throw EllipticityLossError("background coefficients lost positivity");
    const Mat2 a0 = coeff_a(gas, sol, r, Vec2{0.0, 0.0}, 0.0);
    const double lam = std::min(a0.a, a0.d);
    floor = first ? lam : std::min(floor, lam);
    first = false;
  }
  g.ellipticity_floor = 0.5 * floor;
  return g;
}

ShockFront flat_front(const SectorGrid& grid) {
  ShockFront f;
  f.f.assign(static_cast<std::size_t>(grid.nt), grid.r_s);
  f.df.assign(static_cast<std::size_t>(grid.nt), 0.0);
  return f;
}

void refresh_front_slope(const SectorGrid& grid, ShockFront& front) {
  const int nt = grid.nt;
  if (front.f.size() != static_cast<std::size_t>(nt))
    throw ValidationError("front sample count does not match the grid");
  front.df.assign(static_cast<std::size_t>(nt), 0.0);
  const double h2 = 2.0 * grid.ht;
  auto f = [&](int j) { return front.f[static_cast<std::size_t>(j)]; };
  front.df[0] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / h2;
  for (int j = 1; j < nt - 1; ++j)
    front.df[static_cast<std::size_t>(j)] = (f(j + 1) - f(j - 1)) / h2;
  front.df[static_cast<std::size_t>(nt - 1)] =
      (3.0 * f(nt - 1) - 4.0 * f(nt - 2) + f(nt - 3)) / h2;
}

Mat2 coeff_a(const GasModel& gas, const RadialSolution& sol, double r,
             Vec2 eta, double ellipticity_floor) {
  // path average of the flux Jacobian from the background gradient to
  // the perturbed one; symmetric by construction
  const double u0 = sol.u_plus(r);
  const double gm1 = gas.gamma - 1.0;
  const Quad8 q = gauss8();
  Mat2 acc{0.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < 8; ++k) {
    const Vec2 g{u0 + q.t[k] * eta.x, q.t[k] * eta.y};
    const double q2 = g.norm2();
    const double head = gas.b0 - 0.5 * q2;
    if (head <= 0.0) throw CavitationError("stagnation head exhausted in coefficient");
    const double rho = std::pow(head, 1.0 / gm1);
    const double slope = -std::pow(head, (2.0 - gas.gamma) / gm1) / gm1;
    Mat2 dA = rho * Mat2::identity() + slope * outer(g, g);
    acc = acc + q.w[k] * dA;
  }
  const double tr = acc.a + acc.d;
  const double det = acc.det();
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lam_min = 0.5 * tr - disc;
  if (lam_min <= ellipticity_floor)
    throw EllipticityLossError("coefficient matrix lost uniform ellipticity");
  return acc;
}

LinearSystem assemble_linear_system(const GasModel& gas, const RadialSolution& sol,
                                    const SectorGrid& grid, const ShockFront& front,
                                    const Field2D& frozen, const PerturbationData& data,
                                    bool parallel) {
  check_dims(grid, front, frozen);
  ProblemRefs pr{gas, sol, grid, front, frozen.v, data};
  RowsBuild rb = build_rows(pr, parallel);
  return finalize_system(gas, sol, grid, rb);
}

Field2D solve_linear(const LinearSystem& sys) {
  if (sys.n <= 0 || sys.rowptr.size() != static_cast<std::size_t>(sys.n) + 1)
    throw ValidationError("linear system is empty or malformed");
  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.val.size());
  for (int row = 0; row < sys.n; ++row) {
    for (int k = sys.rowptr[static_cast<std::size_t>(row)];
         k < sys.rowptr[static_cast<std::size_t>(row) + 1]; ++k) {
      trips.emplace_back(row, sys.col[static_cast<std::size_t>(k)],
                         sys.val[static_cast<std::size_t>(k)]);
    }
  }
  SpMat a(sys.n, sys.n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw SolverDivergenceError("sparse factorization of the oblique system failed");
  Eigen::VectorXd b(sys.n);
  for (int i = 0; i < sys.n; ++i) b[i] = sys.rhs[static_cast<std::size_t>(i)];
  const Eigen::VectorXd x = lu.solve(b);

  const Eigen::VectorXd resid = a * x - b;
  const double rnorm = resid.lpNorm<Eigen::Infinity>();
  double anorm = 0.0;
  for (double v : sys.val) anorm = std::max(anorm, std::abs(v));
  const double xnorm = x.lpNorm<Eigen::Infinity>();
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (rnorm > 1e-10 * (anorm * xnorm + bnorm + 1.0))
    throw SolverDivergenceError("direct solve left a large algebraic residual");

  Field2D out(Field2D::Quantity::psi, sys.nr, sys.nt);
  for (int i = 0; i < sys.n; ++i) out.v[static_cast<std::size_t>(i)] = x[i];
  return out;
}

Field2D picard_step(const GasModel& gas, const RadialSolution& sol,
                    const SectorGrid& grid, const ShockFront& front,
                    const Field2D& current, const PerturbationData& data,
                    bool parallel) {
  const LinearSystem sys = assemble_linear_system(gas, sol, grid, front, current, data, parallel);
  return solve_linear(sys);
}

ShockFront front_update(const GasModel& gas, const RadialSolution& sol,
                        const SectorGrid& grid, const ShockFront& front,
                        const Field2D& psi, const PerturbationData& data) {
  check_dims(grid, front, psi);
  const double denom = sol.jump.upstream.u - sol.jump.downstream.u;
  if (denom <= 0.0) throw DegenerateShockError("front update needs a positive speed jump");
  const double band = 0.98 * 2.0 * sol.noz.delta;
  const double mu_floor = 0.5 * mu0(gas, sol.noz, sol);

  ShockFront out = front;
  for (int j = 0; j < grid.nt; ++j) {
    const double theta = grid.theta[static_cast<std::size_t>(j)];
    const double fj = front.f[static_cast<std::size_t>(j)];
    const double jump_gap =
        data.phi_minus(sol, fj, theta) - (sol.phi_plus(fj) + psi.at(0, j));
    const double fnew = fj - jump_gap / denom;
    if (std::abs(fnew - grid.r_s) > band)
      throw FrontEscapeError("front left the admissible band around the background shock");
    out.f[static_cast<std::size_t>(j)] = fnew;
  }
  for (int j = 0; j < grid.nt; ++j) {
    const double mf = mu_f(gas, sol, out.f[static_cast<std::size_t>(j)]);
    if (mf < mu_floor)
      throw FrontEscapeError("oblique coefficient dropped below half its background value");
  }
  refresh_front_slope(grid, out);
  return out;
}

FbpResiduals nonlinear_residuals(const GasModel& gas, const RadialSolution& sol,
                                 const SectorGrid& grid, const ShockFront& front,
                                 const Field2D& psi, const PerturbationData& data,
                                 bool parallel) {
  const LinearSystem sys = assemble_linear_system(gas, sol, grid, front, psi, data, parallel);
  FbpResiduals res = class_residuals(sys, grid, psi);
  res.phi_jump = phi_jump_residual(sol, grid, front, psi, data);
  return res;
}

FbpSolution solve_fbp(const GasModel& gas, const RadialSolution& sol,
                      const SectorGrid& grid, const PerturbationData& data,
                      const FbpOptions& opt) {
  if (opt.max_outer < 1) throw ValidationError("outer iteration budget must be positive");
  FbpSolution out;
  out.front = flat_front(grid);
  out.psi = Field2D(Field2D::Quantity::psi, grid.nr, grid.nt);

  double trust = -1.0;
  bool converged = false;
  const double mu_base = mu0(gas, sol.noz, sol);

  for (int it = 1; it <= opt.max_outer; ++it) {
    ProblemRefs pr{gas, sol, grid, out.front, out.psi.v, data};
    RowsBuild rb = build_rows(pr, opt.parallel);
    out.min_b1_dot_nu = std::min(out.min_b1_dot_nu, rb.min_b1);
    const LinearSystem sys = finalize_system(gas, sol, grid, rb);

    // residual of the current iterate under its own assembly; successive
    // refactorizations jitter the iterate near round-off, so the residual
    // alone decides convergence
    FbpResiduals res = class_residuals(sys, grid, out.psi);
    res.phi_jump = phi_jump_residual(sol, grid, out.front, out.psi, data);
    if (it > 1 && res.max() <= opt.tol_outer) {
      out.residuals = res;
      out.iterations = it - 1;
      converged = true;
      break;
    }

    const Field2D psi_new = solve_linear(sys);
    if (trust < 0.0) {
      trust = std::max(opt.trust_factor * psi_new.norm_inf(), 1e-9);
    } else if (psi_new.norm_inf() > trust) {
      throw TrustRegionError("perturbation potential left the trust region of the first step");
    }

    const ShockFront front_new = front_update(gas, sol, grid, out.front, psi_new, data);

    double dpsi = 0.0;
    for (std::size_t k = 0; k < psi_new.v.size(); ++k)
      dpsi = std::max(dpsi, std::abs(psi_new.v[k] - out.psi.v[k]));
    out.step_history.push_back(dpsi);

    out.psi = psi_new;
    out.front = front_new;

    double mu_ratio = 1.0;
    for (double fv : out.front.f)
      mu_ratio = std::min(mu_ratio, mu_f(gas, sol, fv) / mu_base);
    out.min_mu_ratio = std::min(out.min_mu_ratio, mu_ratio);
  }

  if (!converged)
    throw NoConvergenceError("outer iteration exhausted its budget before the tolerance");

  // estimated per-step contraction over the early geometric phase, before
  // increments reach the refactorization noise floor
  if (out.step_history.size() >= 2) {
    const std::size_t k = std::min<std::size_t>(3, out.step_history.size() - 1);
    const double a = out.step_history[0];
    const double b = out.step_history[k];
    out.contraction = (a > 0.0 && b > 0.0) ? std::pow(b / a, 1.0 / static_cast<double>(k)) : 0.0;
  }
  out.psi_norm = out.psi.norm_inf();
  for (double fv : out.front.f)
    out.front_offset = std::max(out.front_offset, std::abs(fv - grid.r_s));
  return out;
}

}  // namespace transonic
