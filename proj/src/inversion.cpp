#include "transonic/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "transonic/errors.hpp"
#include "transonic/util.hpp"

namespace transonic {

namespace {

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

std::vector<double> uniform_theta(double theta_half, int n) {
  std::vector<double> th(uz(n));
  const double h = 2.0 * theta_half / (n - 1);
  for (int k = 0; k < n; ++k)
    th[uz(k)] = (k == n - 1) ? theta_half : -theta_half + k * h;
  return th;
}

void check_profile_shape(double theta_half, int n_samples, int n_modes) {
  if (!(theta_half > 0.0)) throw ValidationError("profile needs a positive arc half-angle");
  if (n_samples < 3) throw ValidationError("profile needs at least 3 samples");
  if (n_modes < 1) throw ValidationError("profile needs at least one mode");
  if (n_modes > n_samples - 1)
    throw ValidationError("profile mode count exceeds the node Nyquist limit");
}

std::vector<double> synth_samples(double theta_half,
                                  const std::vector<double>& coeff,
                                  const std::vector<double>& theta) {
  std::vector<double> v(theta.size(), 0.0);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < coeff.size(); ++j)
      s += coeff[j] * cos_mode(static_cast<int>(j), theta[k], theta_half);
    v[k] = s;
  }
  return v;
}

// trapezoid cosine analysis on the endpoint grid; exact below the Nyquist mode
std::vector<double> analyze_samples(double theta_half,
                                    const std::vector<double>& samples,
                                    const std::vector<double>& theta,
                                    int n_modes) {
  const int m = static_cast<int>(samples.size()) - 1;
  std::vector<double> c(uz(n_modes), 0.0);
  for (int j = 0; j < n_modes; ++j) {
    double s = 0.5 * (samples.front() * cos_mode(j, theta.front(), theta_half) +
                      samples.back() * cos_mode(j, theta.back(), theta_half));
    for (int k = 1; k < m; ++k)
      s += samples[uz(k)] * cos_mode(j, theta[uz(k)], theta_half);
    c[uz(j)] = (j == 0 ? 1.0 : 2.0) * s / m;
  }
  return c;
}

}  // namespace

ExitProfile profile_from_samples(double theta_half,
                                 const std::vector<double>& samples,
                                 int n_modes) {
  check_profile_shape(theta_half, static_cast<int>(samples.size()), n_modes);
  ExitProfile p;
  p.theta_half = theta_half;
  p.theta = uniform_theta(theta_half, static_cast<int>(samples.size()));
  p.value = samples;
  p.coeff = analyze_samples(theta_half, samples, p.theta, n_modes);
  return p;
}

ExitProfile profile_from_coeffs(double theta_half,
                                const std::vector<double>& coeff,
                                int n_samples) {
  check_profile_shape(theta_half, n_samples, static_cast<int>(coeff.size()));
  ExitProfile p;
  p.theta_half = theta_half;
  p.theta = uniform_theta(theta_half, n_samples);
  p.coeff = coeff;
  p.value = synth_samples(theta_half, coeff, p.theta);
  return p;
}

double profile_tail_gap(const ExitProfile& prof) {
  if (prof.value.empty() || prof.coeff.empty())
    throw ValidationError("profile is empty");
  const std::vector<double> synth =
      synth_samples(prof.theta_half, prof.coeff, prof.theta);
  double gap = 0.0;
  for (std::size_t k = 0; k < synth.size(); ++k)
    gap = std::max(gap, std::abs(synth[k] - prof.value[k]));
  return gap;
}

std::pair<double, double> a1_a2(const GasModel& gas, const RadialSolution& sol) {
  const double gm1 = gas.gamma - 1.0;
  const double nn = static_cast<double>(sol.noz.n);
  const double r1 = sol.noz.r1;

  const double u1 = sol.u_plus(r1);
  const double head1 = gas.b0 - 0.5 * u1 * u1;
  const double a1 = -2.0 * gas.gamma * u1 * head1 /
                    ((gas.gamma + 1.0) * std::pow(r1, nn - 1.0) * (gas.k0() - u1 * u1));

  const double rs = sol.r_s;
  const double us = sol.u_plus(rs);
  const double heads = gas.b0 - 0.5 * us * us;
  const double head_pow = std::pow(heads, gas.gamma / gm1);
  const double gap = shock_pressure_slope_gap(gas, sol.noz, sol);
  const double m0 = mu0(gas, sol.noz, sol);
  const double du_jump = sol.u_minus(rs) - us;
  if (du_jump <= 0.0) throw DegenerateShockError("background shock has no velocity jump");
  const double a2 =
      (gap / du_jump +
       gas.gamma * sol.p_plus(rs) * m0 * us / (gm1 * heads)) /
      head_pow;
  return {a1, a2};
}

std::vector<double> solve_mode(const GasModel& gas, const RadialSolution& sol,
                               double lambda_j, double exit_flux, int n_grid) {
  if (!(lambda_j >= 0.0)) throw ValidationError("mode eigenvalue must be nonnegative");
  if (n_grid < 5) throw ValidationError("mode grid needs at least 5 points");
  if (!std::isfinite(exit_flux)) throw ValidationError("exit flux datum must be finite");

  const double rs = sol.r_s;
  const double r1 = sol.noz.r1;
  const int m = n_grid;
  const double h = (r1 - rs) / (m - 1);
  std::vector<double> r(uz(m));
  for (int i = 0; i < m; ++i) r[uz(i)] = (i == m - 1) ? r1 : rs + i * h;

  const double m0 = mu0(gas, sol.noz, sol);

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(uz(3 * m));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);

  // shock row: one-sided second-order derivative against the line-averaged
  // shock coefficient
  trips.emplace_back(0, 0, -3.0 / (2.0 * h) - m0);
  trips.emplace_back(0, 1, 4.0 / (2.0 * h));
  trips.emplace_back(0, 2, -1.0 / (2.0 * h));

  // interior rows in flux form with midpoint coefficients, scaled by h^2
  for (int i = 1; i < m - 1; ++i) {
    const double klo = coeff_k1(gas, sol, r[uz(i)] - 0.5 * h);
    const double khi = coeff_k1(gas, sol, r[uz(i)] + 0.5 * h);
    const double k2 = coeff_k2(gas, sol, r[uz(i)]);
    trips.emplace_back(i, i - 1, klo);
    trips.emplace_back(i, i, -(klo + khi) - lambda_j * k2 * h * h);
    trips.emplace_back(i, i + 1, khi);
  }

  // exit row: one-sided second-order derivative against the flux datum
  trips.emplace_back(m - 1, m - 1, 3.0 / (2.0 * h));
  trips.emplace_back(m - 1, m - 2, -4.0 / (2.0 * h));
  trips.emplace_back(m - 1, m - 3, 1.0 / (2.0 * h));
  b[m - 1] = exit_flux / coeff_k1(gas, sol, r1);

  SpMat a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
    throw ModeSolveError("factorization of the mode system failed");
  const Eigen::VectorXd x = lu.solve(b);

  double amax = 0.0;
  for (const auto& t : trips) amax = std::max(amax, std::abs(t.value()));
  const double resid = (a * x - b).lpNorm<Eigen::Infinity>();
  const double scale = std::max(b.lpNorm<Eigen::Infinity>(),
                                amax * x.lpNorm<Eigen::Infinity>());
  if (!x.allFinite() || resid > 1e-9 * std::max(1.0, scale))
    throw ModeSolveError("mode solution failed the residual check");

  std::vector<double> q(uz(m));
  for (int i = 0; i < m; ++i) q[uz(i)] = x[i];
  return q;
}

ModeSystem build_mode_system(const GasModel& gas, const RadialSolution& sol,
                             double theta_half, int n_modes, int n_grid,
                             double kernel_floor_rel, bool parallel) {
  if (!(theta_half > 0.0)) throw ValidationError("mode system needs a positive arc half-angle");
  if (n_modes < 1) throw ValidationError("mode system needs at least one mode");

  ModeSystem ms;
  ms.theta_half = theta_half;
  ms.r_s = sol.r_s;
  ms.r1 = sol.noz.r1;
  ms.n_grid = n_grid;
  ms.flux_weight = std::pow(ms.r1, static_cast<double>(sol.noz.n) - 1.0);

  const auto [a1, a2] = a1_a2(gas, sol);
  ms.a1 = a1;
  ms.a2 = a2;
  const double u1 = sol.u_plus(ms.r1);
  ms.head_pow_exit = std::pow(gas.b0 - 0.5 * u1 * u1, gas.gamma / (gas.gamma - 1.0));
  ms.e0 = sol.p_plus(ms.r1) / ms.head_pow_exit;
  ms.mu0 = mu0(gas, sol.noz, sol);
  ms.kernel_floor = kernel_floor_rel * std::abs(ms.e0 * ms.a1);

  const double theta_full = 2.0 * theta_half;
  ms.lambda.resize(uz(n_modes));
  for (int j = 0; j < n_modes; ++j) {
    const double wav = static_cast<double>(j) * kPi / theta_full;
    ms.lambda[uz(j)] = wav * wav;
  }

  const double h = (ms.r1 - ms.r_s) / (n_grid - 1);
  ms.r.resize(uz(n_grid));
  for (int i = 0; i < n_grid; ++i)
    ms.r[uz(i)] = (i == n_grid - 1) ? ms.r1 : ms.r_s + i * h;

  ms.q.assign(uz(n_modes), {});
  ms.q_shock.assign(uz(n_modes), 0.0);
  ms.d.assign(uz(n_modes), 0.0);
  std::vector<std::string> failures(uz(n_modes));
  parallel_for(n_modes, parallel, [&](int j) {
    try {
      ms.q[uz(j)] = solve_mode(gas, sol, ms.lambda[uz(j)], 1.0, n_grid);
      ms.q_shock[uz(j)] = ms.q[uz(j)].front();
      ms.d[uz(j)] = ms.e0 * ms.a1 + ms.head_pow_exit * ms.a2 * ms.q_shock[uz(j)];
    } catch (const Error& e) {
      failures[uz(j)] = e.what();
    }
  });
  for (int j = 0; j < n_modes; ++j)
    if (!failures[uz(j)].empty())
      throw ModeSolveError("mode " + std::to_string(j) + ": " + failures[uz(j)]);
  return ms;
}

ExitProfile dvp_apply(const ModeSystem& modes, const ExitProfile& w) {
  if (w.n_modes() > static_cast<int>(modes.d.size()))
    throw ValidationError("profile carries more modes than the mode system");
  std::vector<double> out(w.coeff.size());
  for (std::size_t j = 0; j < w.coeff.size(); ++j)
    out[j] = modes.flux_weight * modes.d[j] * w.coeff[j];
  return profile_from_coeffs(modes.theta_half, out,
                             std::max(w.n_samples(), w.n_modes() + 1));
}

ExitProfile dvp_invert(const ModeSystem& modes, const ExitProfile& rhs) {
  if (rhs.n_modes() > static_cast<int>(modes.d.size()))
    throw ValidationError("profile carries more modes than the mode system");
  for (std::size_t j = 0; j < rhs.coeff.size(); ++j)
    if (std::abs(modes.d[j]) < modes.kernel_floor)
      throw NearSingularError("mode multiplier " + std::to_string(j) +
                              " is below the kernel floor");
  std::vector<double> out(rhs.coeff.size());
  for (std::size_t j = 0; j < rhs.coeff.size(); ++j)
    out[j] = rhs.coeff[j] / (modes.flux_weight * modes.d[j]);
  return profile_from_coeffs(modes.theta_half, out,
                             std::max(rhs.n_samples(), rhs.n_modes() + 1));
}

ExitProfile forward_P(const GasModel& gas, const RadialSolution& sol,
                      const SectorGrid& grid, const PerturbationData& data,
                      const InversionOptions& opt, FlowBundle* bundle) {
  FbpSolution fbp = solve_fbp(gas, sol, grid, data, opt.fbp);
  CharField field = build_char_field(gas, sol, grid, fbp.front, fbp.psi, data,
                                     opt.wall_slip_tol);
  const CubicCurve curve = e_init_curve(gas, sol, grid, fbp.front, fbp.psi, data);
  Field2D e_field = transport_E(
      field, [&curve](double th) { return curve(th); }, opt.fbp.parallel);
  Field2D pressure = reconstruct_pressure(gas, sol, grid, fbp.front, fbp.psi,
                                          data, field, e_field);

  std::vector<double> row(uz(grid.nt));
  for (int j = 0; j < grid.nt; ++j) row[uz(j)] = pressure.at(grid.nr - 1, j);
  const int n_modes = std::min(opt.n_modes, grid.nt - 1);
  ExitProfile p = profile_from_samples(grid.theta_half, row, n_modes);
  if (bundle) {
    bundle->fbp = std::move(fbp);
    bundle->field = std::move(field);
    bundle->e_field = std::move(e_field);
    bundle->pressure = std::move(pressure);
  }
  return p;
}

InversionResult invert_P(const GasModel& gas, const RadialSolution& sol,
                         const SectorGrid& grid, const PerturbationData& base,
                         const ExitProfile& target_p, const ModeSystem& modes,
                         const InversionOptions& opt) {
  if (target_p.n_samples() != grid.nt)
    throw ValidationError("target profile is not sampled on the solver grid");
  if (std::abs(target_p.theta_half - grid.theta_half) >
      1e-12 * (1.0 + grid.theta_half))
    throw ValidationError("target profile spans a different arc than the grid");
  double pscale = 0.0;
  for (double v : target_p.value) pscale = std::max(pscale, std::abs(v));
  if (profile_tail_gap(target_p) > opt.tol_basis * (1.0 + pscale))
    throw ValidationError("target profile has spectral content beyond the mode cutoff");

  const int n_modes = std::min(opt.n_modes, grid.nt - 1);
  if (static_cast<int>(base.vex_coeff.size()) > n_modes)
    throw ValidationError("starting datum carries more modes than the cutoff");
  PerturbationData data = base;
  data.vex_coeff.resize(uz(n_modes), 0.0);

  InversionResult out;
  bool converged = false;
  for (int it = 0; it < opt.max_newton; ++it) {
    FlowBundle bundle;
    ExitProfile p = forward_P(gas, sol, grid, data, opt, &bundle);
    std::vector<double> rv(uz(grid.nt));
    for (int j = 0; j < grid.nt; ++j) rv[uz(j)] = p.value[uz(j)] - target_p.value[uz(j)];
    ExitProfile residual = profile_from_samples(grid.theta_half, rv, n_modes);
    double rnorm = 0.0;
    for (double v : residual.value) rnorm = std::max(rnorm, std::abs(v));

    if (!out.residual_history.empty() && rnorm >= out.residual_history.back())
      throw NoConvergenceError("exit-pressure residual stopped decreasing");
    out.residual_history.push_back(rnorm);

    const ExitProfile corr = dvp_invert(modes, residual);
    for (int j = 0; j < n_modes; ++j) data.vex_coeff[uz(j)] -= corr.coeff[uz(j)];
    ++out.iterations;
    if (rnorm <= opt.tol_newton) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NoConvergenceError("exit-pressure iteration did not reach the tolerance");

  // refresh the bundle at the returned datum
  ExitProfile p = forward_P(gas, sol, grid, data, opt, &out.bundle);
  double rnorm = 0.0;
  for (int j = 0; j < grid.nt; ++j)
    rnorm = std::max(rnorm, std::abs(p.value[uz(j)] - target_p.value[uz(j)]));
  out.residual_history.push_back(rnorm);
  out.p_ex = std::move(p);

  const double vc = background_exit_flux(gas, sol);
  std::vector<double> vv(uz(grid.nt));
  for (int j = 0; j < grid.nt; ++j)
    vv[uz(j)] = data.vex(grid.theta[uz(j)], vc);
  out.v_ex = profile_from_samples(grid.theta_half, vv, n_modes);
  return out;
}

}  // namespace transonic
