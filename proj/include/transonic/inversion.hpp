#pragma once

#include <utility>
#include <vector>

#include "transonic/elliptic.hpp"
#include "transonic/radial.hpp"
#include "transonic/transport.hpp"

namespace transonic {

// function on the exit arc, held both as nodal samples on a uniform grid
// (walls included) and as coefficients in the wall-compatible cosine basis
struct ExitProfile {
  double theta_half = 0.0;
  std::vector<double> theta;
  std::vector<double> value;
  std::vector<double> coeff;

  int n_samples() const { return static_cast<int>(value.size()); }
  int n_modes() const { return static_cast<int>(coeff.size()); }
};

// build from samples; coefficients by the trapezoid cosine transform,
// exact for profiles band-limited below the node Nyquist mode
ExitProfile profile_from_samples(double theta_half,
                                 const std::vector<double>& samples,
                                 int n_modes);

// build from coefficients; samples by direct synthesis
ExitProfile profile_from_coeffs(double theta_half,
                                const std::vector<double>& coeff,
                                int n_samples);

// max-norm gap between the stored samples and the truncated cosine
// synthesis; measures the spectral tail beyond the kept modes
double profile_tail_gap(const ExitProfile& prof);

// background sensitivities of the exit pressure to the exit flux datum.
// a1 multiplies the datum directly through the head power at the exit,
// a2 multiplies the induced shock-trace potential through the entropy
// factor; both are strictly negative for an admissible background
std::pair<double, double> a1_a2(const GasModel& gas, const RadialSolution& sol);

// radial factor of one angular mode of the background-linearized potential
// problem: (k1 q')' = lambda k2 q on [r_s, r1], with the shock condition
// q'(r_s) = mu0 q(r_s) and the exit flux condition q'(r1) = exit_flux/k1(r1).
// Returns q on a uniform n_grid point grid
std::vector<double> solve_mode(const GasModel& gas, const RadialSolution& sol,
                               double lambda_j, double exit_flux,
                               int n_grid = 4001);

// diagonalized background derivative of the exit-pressure map in the cosine
// basis, with the per-mode radial responses and multipliers
struct ModeSystem {
  double theta_half = 0.0;
  double r_s = 0.0, r1 = 0.0;
  double flux_weight = 1.0;  // converts flux density to the weighted datum
  std::vector<double> lambda;
  std::vector<double> r;                // shared radial grid
  std::vector<std::vector<double>> q;   // unit-datum mode responses
  std::vector<double> q_shock;          // responses at the shock circle
  std::vector<double> d;                // per-mode exit-pressure multipliers
  double a1 = 0.0, a2 = 0.0;
  double e0 = 0.0;             // background transported factor at the exit
  double head_pow_exit = 0.0;  // background head power at the exit
  double mu0 = 0.0;
  double kernel_floor = 0.0;
  int n_grid = 0;
};

ModeSystem build_mode_system(const GasModel& gas, const RadialSolution& sol,
                             double theta_half, int n_modes = 32,
                             int n_grid = 4001, double kernel_floor_rel = 1e-8,
                             bool parallel = false);

// action of the background derivative on an exit flux-density deviation;
// returns the exit pressure deviation
ExitProfile dvp_apply(const ModeSystem& modes, const ExitProfile& w);

// inverse action; requires every multiplier above the kernel floor
ExitProfile dvp_invert(const ModeSystem& modes, const ExitProfile& rhs);

struct FlowBundle {
  FbpSolution fbp;
  CharField field;
  Field2D e_field;
  Field2D pressure;
};

struct InversionOptions {
  FbpOptions fbp;
  int n_modes = 32;
  int mode_grid = 4001;
  double kernel_floor_rel = 1e-8;
  double tol_newton = 1e-8;
  int max_newton = 12;
  double tol_basis = 1e-8;    // spectral-tail gate on the target profile
  double wall_slip_tol = 1e-3;
};

// full forward map: free-boundary solve, characteristic transport and
// pressure reconstruction; returns the exit pressure row as a profile.
// The optional bundle receives the intermediate fields
ExitProfile forward_P(const GasModel& gas, const RadialSolution& sol,
                      const SectorGrid& grid, const PerturbationData& data,
                      const InversionOptions& opt = {},
                      FlowBundle* bundle = nullptr);

struct InversionResult {
  ExitProfile v_ex;  // recovered exit flux-density profile
  ExitProfile p_ex;  // achieved exit pressure profile
  FlowBundle bundle;
  std::vector<double> residual_history;
  int iterations = 0;
};

// Newton iteration on the exit flux datum with the derivative frozen at the
// background; the residual sequence must decrease strictly until it passes
// tol_newton, and the lastly measured correction is still applied so reruns
// from different starts land on the same datum
InversionResult invert_P(const GasModel& gas, const RadialSolution& sol,
                         const SectorGrid& grid, const PerturbationData& base,
                         const ExitProfile& target_p, const ModeSystem& modes,
                         const InversionOptions& opt = {});

}  // namespace transonic
