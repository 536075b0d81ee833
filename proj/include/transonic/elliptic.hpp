#pragma once

#include <string>
#include <vector>

#include "transonic/radial.hpp"

namespace transonic {

// uniform grid on the front-flattened sector: mapped radius rho in [r_s, r1]
// by theta in [-theta_half, theta_half]
struct SectorGrid {
  int nr = 0, nt = 0;
  double r_s = 0.0, r1 = 0.0;
  double theta_half = 0.0;
  double hr = 0.0, ht = 0.0;
  std::vector<double> rho;
  std::vector<double> theta;
  std::vector<double> k1, k2, omega1;  // background radial coefficients
  double ellipticity_floor = 0.0;

  double theta_full() const { return 2.0 * theta_half; }
  int idx(int i, int j) const { return i * nt + j; }
};

SectorGrid make_sector_grid(const GasModel& gas, const RadialSolution& sol,
                            int nr, int nt, double theta_full);

struct ShockFront {
  std::vector<double> f;   // radius per theta node
  std::vector<double> df;  // d/dtheta at nodes
};

ShockFront flat_front(const SectorGrid& grid);
void refresh_front_slope(const SectorGrid& grid, ShockFront& front);

struct Field2D {
  enum class Quantity { psi, E, p, aux };
  Quantity quantity = Quantity::aux;
  int nr = 0, nt = 0;
  std::vector<double> v;

  Field2D() = default;
  Field2D(Quantity q, int nr_, int nt_)
      : quantity(q), nr(nr_), nt(nt_), v(static_cast<std::size_t>(nr_) * nt_, 0.0) {}
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * nt + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * nt + j]; }
  double norm_inf() const;
};

// named analytic perturbation families; all evaluators work in the local
// polar orthonormal frame
struct PerturbationData {
  std::string psi_family = "identity";  // "identity" | "radial_bump"
  double psi_amp = 0.0;
  int psi_mode = 1;
  double up_phi_amp = 0.0;
  int up_phi_mode = 1;
  double up_p_amp = 0.0;
  int up_p_mode = 1;
  std::vector<double> vex_coeff;  // exit flux offsets per cosine mode
  double theta_half = 0.0;

  Mat2 jac_psi(double r, double theta) const;
  double phi_minus(const RadialSolution& sol, double r, double theta) const;
  Vec2 grad_phi_minus(const RadialSolution& sol, double r, double theta) const;
  double p_minus(const RadialSolution& sol, double r, double theta) const;
  double rho_minus(const RadialSolution& sol, double r, double theta) const;
  double vex(double theta, double v_c) const;
  double amplitude() const;
};

// cosine of mode j on the arc, Neumann-compatible at both walls
double cos_mode(int j, double theta, double theta_half);
double cos_mode_deriv(int j, double theta, double theta_half);

// background exit flux density of the potential system
double background_exit_flux(const GasModel& gas, const RadialSolution& sol);

// radial divergence-form coefficients of the background-linearized potential
// operator: k1 weights the radial flux, k2 the angular one
double coeff_k1(const GasModel& gas, const RadialSolution& sol, double r);
double coeff_k2(const GasModel& gas, const RadialSolution& sol, double r);

Mat2 coeff_a(const GasModel& gas, const RadialSolution& sol, double r,
             Vec2 eta, double ellipticity_floor = 0.0);

struct LinearSystem {
  int n = 0;
  int nr = 0, nt = 0;
  std::vector<int> rowptr, col;
  std::vector<double> val, rhs;
  double flux_scale = 1.0;  // normalization for residual reporting
};

LinearSystem assemble_linear_system(const GasModel& gas,
                                    const RadialSolution& sol,
                                    const SectorGrid& grid,
                                    const ShockFront& front,
                                    const Field2D& frozen,
                                    const PerturbationData& data,
                                    bool parallel = false);

Field2D solve_linear(const LinearSystem& sys);

Field2D picard_step(const GasModel& gas, const RadialSolution& sol,
                    const SectorGrid& grid, const ShockFront& front,
                    const Field2D& current, const PerturbationData& data,
                    bool parallel = false);

ShockFront front_update(const GasModel& gas, const RadialSolution& sol,
                        const SectorGrid& grid, const ShockFront& front,
                        const Field2D& psi, const PerturbationData& data);

struct FbpOptions {
  int max_outer = 60;
  double tol_outer = 1e-11;
  double trust_factor = 6.0;
  bool parallel = false;
};

struct FbpResiduals {
  double pde = 0.0;
  double shock = 0.0;
  double wall = 0.0;
  double exit = 0.0;
  double phi_jump = 0.0;
  double max() const;
};

struct FbpSolution {
  ShockFront front;
  Field2D psi;
  FbpResiduals residuals;
  std::vector<double> step_history;
  double contraction = 0.0;
  int iterations = 0;
  double psi_norm = 0.0;
  double front_offset = 0.0;
  double min_b1_dot_nu = 1.0;
  double min_mu_ratio = 1.0;
};

FbpSolution solve_fbp(const GasModel& gas, const RadialSolution& sol,
                      const SectorGrid& grid, const PerturbationData& data,
                      const FbpOptions& opt = {});

// residuals of the current iterate under a freshly assembled system,
// split by row class and normalized by the flux scale
FbpResiduals nonlinear_residuals(const GasModel& gas, const RadialSolution& sol,
                                 const SectorGrid& grid,
                                 const ShockFront& front, const Field2D& psi,
                                 const PerturbationData& data,
                                 bool parallel = false);

// physical polar gradient of a mapped-grid field at a node, using the same
// stencils as the assembler (central inside, one-sided second order at edges)
Vec2 node_gradient(const SectorGrid& grid, const ShockFront& front,
                   const Field2D& w, int i, int j);

// physical radius of a mapped node
double node_radius(const SectorGrid& grid, const ShockFront& front, int i, int j);

}  // namespace transonic
