#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transonic/inversion.hpp"

namespace transonic {

enum class RunMode { Background, LocateShock, Solve, Sweep, Check, DemoIsentropic };

RunMode parse_run_mode(const std::string& name);
std::string run_mode_name(RunMode mode);

// fully resolved run configuration; loadable from TOML or JSON and
// overridable from the command line
struct RunConfig {
  RunMode mode = RunMode::Background;
  double gamma = 1.4;
  // nozzle sector: radii, spatial dimension, full opening angle
  double r0 = 1.0;
  double r1 = 2.0;
  int dim = 2;
  double theta = 1.0;
  // inflow state at the inner radius
  double rho_in = 1.0;
  double u_in = 2.0;
  double p_in = 1.0;
  // background shock radius for the direct modes
  double r_s = 1.5;
  // exit pressure target: optional constant plus cosine-mode offsets
  bool exit_p_set = false;
  double exit_p = 0.0;
  std::vector<double> exit_coeff;
  // perturbation spec, named analytic families
  std::string psi_family = "identity";
  double psi_amp = 0.0;
  int psi_mode = 1;
  double up_phi_amp = 0.0;
  int up_phi_mode = 1;
  double up_p_amp = 0.0;
  int up_p_mode = 1;
  std::vector<double> vex_coeff;
  // amplitude schedule for the sweep mode
  int sweep_levels = 4;
  double sweep_factor = 0.5;
  // numerics
  int nr = 65;
  int nt = 17;
  int n_modes = 8;
  int mode_grid = 4001;
  double tol_outer = 1e-11;
  double tol_newton = 1e-8;
  double tol_shock = 1e-10;
  double tol_basis = 1e-8;
  double wall_slip = 1e-3;
  double kernel_floor = 1e-8;
  int max_outer = 60;
  int max_newton = 12;
  std::uint64_t seed = 12345;
  bool parallel = true;
  // output directory for plot data; empty disables file emission
  std::string out_dir;
};

RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);

struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct StageReport {
  std::string name;
  double residual = 0.0;
  long long work = 0;    // deterministic work measure (iterations, nodes)
  double seconds = 0.0;  // wall clock, console only, never serialized
};

struct BranchTable {
  std::vector<double> r, u, p, rho;
};

struct RunReport {
  RunConfig config;
  double r_s = 0.0;  // shock radius actually used (configured or located)
  double p_c = 0.0;  // background exit pressure at that radius
  BranchTable sup, sub;
  std::vector<StageReport> stages;
  std::vector<double> front_theta, front_f;
  ExitProfile exit_p, exit_v;
  std::vector<double> residual_history;
  std::vector<double> mode_lambda, mode_q_shock, mode_d;
  std::vector<double> sweep_amp, sweep_psi, sweep_front, sweep_gap;
  std::vector<double> demo_rs, demo_exit_p, demo_isen_u, demo_isen_p;
  std::vector<InvariantCheck> invariants;

  int failed_invariants() const;
  int exit_code() const { return failed_invariants() == 0 ? 0 : 1; }
};

// dispatches to the module pipeline for the configured mode, evaluates the
// mode's invariant table, and emits plot data when out_dir is set
RunReport run(const RunConfig& cfg);

// gnuplot-ready CSV files plus the versioned JSON report; byte-identical
// across runs with the same config and seed
void emit_plot_data(const RunReport& report, const std::string& dir);

std::string report_json(const RunReport& report);

// distinct process exit code for every pipeline error class
int exit_code_for(const Error& e);

}  // namespace transonic
