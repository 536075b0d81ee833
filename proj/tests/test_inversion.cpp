#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "transonic/elliptic.hpp"
#include "transonic/errors.hpp"
#include "transonic/gas.hpp"
#include "transonic/inversion.hpp"
#include "transonic/radial.hpp"
#include "transonic/util.hpp"

using namespace transonic;

namespace {

struct Setup {
  GasModel gas;
  NozzleRadial noz;
  FlowState inflow{1.0, 2.0, 1.0};
  RadialSolution sol;
  Setup()
      : gas(make_gas(1.4, FlowState{1.0, 2.0, 1.0})),
        noz(1.0, 2.0, 2),
        sol(background_solution(gas, noz, FlowState{1.0, 2.0, 1.0}, 1.5)) {}
};

const Setup& setup() {
  static Setup s;
  return s;
}

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("profile round trips are exact for band-limited data") {
  const double th = 0.5;
  const int nt = 33;
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> coeff(10);
  for (double& c : coeff) c = unif(rng);

  ExitProfile p = profile_from_coeffs(th, coeff, nt);
  CHECK(p.n_samples() == nt);
  CHECK(p.n_modes() == 10);

  // samples -> coefficients recovers the band-limited input exactly
  ExitProfile q = profile_from_samples(th, p.value, 10);
  CHECK(max_abs_diff(q.coeff, coeff) <= 1e-13);
  CHECK(max_abs_diff(q.value, p.value) <= 1e-13);
  CHECK(profile_tail_gap(q) <= 1e-13);

  // widest representable band: every mode below the node Nyquist round-trips
  std::vector<double> cfull(uz(nt - 1));
  for (double& c : cfull) c = unif(rng);
  ExitProfile synth = profile_from_coeffs(th, cfull, nt);
  ExitProfile full = profile_from_samples(th, synth.value, nt - 1);
  CHECK(max_abs_diff(full.coeff, cfull) <= 1e-12);
  CHECK(profile_tail_gap(full) <= 1e-12);

  // content beyond the cutoff shows up in the tail gap
  std::vector<double> wiggly(uz(nt));
  for (int j = 0; j < nt; ++j) {
    const double theta = -th + 2.0 * th * j / (nt - 1);
    wiggly[uz(j)] = cos_mode(12, theta, th);
  }
  ExitProfile trunc = profile_from_samples(th, wiggly, 8);
  CHECK(profile_tail_gap(trunc) > 0.1);

  CHECK_THROWS_AS((void)profile_from_samples(th, synth.value, nt), ValidationError);
  CHECK_THROWS_AS((void)profile_from_samples(th, std::vector<double>{1.0, 2.0}, 1),
                  ValidationError);
  CHECK_THROWS_AS((void)profile_from_coeffs(-0.5, coeff, nt), ValidationError);
}

TEST_CASE("exit sensitivities are negative and match the closed form") {
  const Setup& s = setup();
  const auto [a1, a2] = a1_a2(s.gas, s.sol);
  CHECK(a1 < 0.0);
  CHECK(a2 < 0.0);

  // independent closed form for the shock-position sensitivity
  const double rs = s.sol.r_s;
  const double um = s.sol.u_minus(rs);
  const double us = s.sol.jump.downstream.u;
  const double heads = s.gas.b0 - 0.5 * us * us;
  const double u0s = std::pow(heads, s.gas.gamma / (s.gas.gamma - 1.0));
  const double a2_closed = (s.noz.n - 1.0) * s.sol.rho_minus(rs) *
                           (s.gas.k0() - um * um) / (rs * u0s * (um - us));
  CHECK(std::abs(a2 - a2_closed) <= 1e-10 * std::abs(a2_closed));

  // frozen 40-digit reference values for the standard geometry
  CHECK(a1 == doctest::Approx(-1.1168368347139299).epsilon(1e-12));
  CHECK(a2 == doctest::Approx(-2.7940185274945840e-3).epsilon(1e-11));
}

TEST_CASE("mode solver reproduces the constant-flux quadrature at lambda zero") {
  const Setup& s = setup();
  const double rs = s.sol.r_s, r1 = s.noz.r1;
  const double m0 = mu0(s.gas, s.noz, s.sol);
  CHECK(m0 > 0.0);

  // at lambda=0 the weighted flux k1 q' is constant, so q follows by quadrature
  std::vector<double> q = solve_mode(s.gas, s.sol, 0.0, 1.0, 4001);
  const double k1s = coeff_k1(s.gas, s.sol, rs);
  CHECK(q.front() == doctest::Approx(1.0 / (k1s * m0)).epsilon(1e-6));

  auto inv_k1 = [&](double r) { return 1.0 / coeff_k1(s.gas, s.sol, r); };
  const Quad8& gq = gauss8();  // unit-interval nodes, weights summing to one
  const int panels = 64;
  auto integrate = [&](double lo, double hi) {
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double a = lo + (hi - lo) * p / panels;
      const double b = lo + (hi - lo) * (p + 1) / panels;
      for (std::size_t k = 0; k < gq.t.size(); ++k)
        acc += (b - a) * gq.w[k] * inv_k1(a + (b - a) * gq.t[k]);
    }
    return acc;
  };
  const double integral = integrate(rs, r1);
  // frozen independent quadrature value for the standard geometry
  CHECK(integral == doctest::Approx(5.690230846079584e-3).epsilon(1e-12));
  CHECK(q.back() - q.front() == doctest::Approx(integral).epsilon(1e-6));

  // interior partial integrals along the solved curve
  for (double frac : {0.25, 0.5, 0.75}) {
    const double r = rs + frac * (r1 - rs);
    const int idx = static_cast<int>(std::lround(frac * 4000));
    const double part = integrate(rs, r);
    CHECK(q[uz(idx)] - q.front() == doctest::Approx(part).epsilon(1e-6));
  }

  // zero exit flux forces the trivial solution
  std::vector<double> qz = solve_mode(s.gas, s.sol, 7.5, 0.0, 2001);
  for (double v : qz) CHECK(std::abs(v) <= 1e-14);

  CHECK_THROWS_AS((void)solve_mode(s.gas, s.sol, -1.0, 1.0, 2001), ValidationError);
  CHECK_THROWS_AS((void)solve_mode(s.gas, s.sol, 1.0, 1.0, 3), ValidationError);

  // second-order convergence of the shock value under grid refinement
  const double lam1 = kPi * kPi;  // first nonzero mode of the unit-arc sector
  const double c251 = solve_mode(s.gas, s.sol, lam1, 1.0, 251).front();
  const double c501 = solve_mode(s.gas, s.sol, lam1, 1.0, 501).front();
  const double c1001 = solve_mode(s.gas, s.sol, lam1, 1.0, 1001).front();
  const double ratio = (c251 - c501) / (c501 - c1001);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));

  // decay at the shock is strictly monotone in the eigenvalue
  double prev = q.front();
  for (int j = 1; j <= 20; ++j) {
    const double lam = lam1 * j * j;
    const double cur = solve_mode(s.gas, s.sol, lam, 1.0, 2001).front();
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("mode multipliers stay negative with a stabilizing tail") {
  const Setup& s = setup();
  ModeSystem ms = build_mode_system(s.gas, s.sol, 0.5, 24, 4001);

  CHECK(ms.mu0 > 0.0);
  CHECK(ms.e0 > 0.0);
  CHECK(ms.head_pow_exit > 0.0);
  CHECK(ms.flux_weight == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ms.r_s == doctest::Approx(1.5).epsilon(1e-15));

  // frozen reference values for the standard geometry
  CHECK(ms.e0 == doctest::Approx(7.8700085662487797e-3).epsilon(1e-12));
  CHECK(ms.head_pow_exit == doctest::Approx(354.09618817920695).epsilon(1e-12));
  const double e0a1 = ms.e0 * ms.a1;
  CHECK(e0a1 == doctest::Approx(-8.7895154563008e-3).epsilon(1e-11));

  REQUIRE(ms.d.size() == 24);
  REQUIRE(ms.q_shock.size() == 24);
  for (int j = 0; j < 24; ++j) {
    const double lam_want = kPi * kPi * j * j;
    CHECK(ms.lambda[uz(j)] == doctest::Approx(lam_want).epsilon(1e-12));
    CHECK(ms.q_shock[uz(j)] > 0.0);
    if (j > 0) CHECK(ms.q_shock[uz(j)] < ms.q_shock[uz(j - 1)]);
    CHECK(ms.d[uz(j)] < 0.0);
    CHECK(std::abs(ms.d[uz(j)]) >= ms.kernel_floor);
    // every multiplier is the direct part plus the shock-coupling part
    const double composed = e0a1 + ms.head_pow_exit * ms.a2 * ms.q_shock[uz(j)];
    CHECK(ms.d[uz(j)] == doctest::Approx(composed).epsilon(1e-14));
  }

  // the coupling decays, so the multipliers stabilize onto the direct part
  double prev_gap = std::abs(ms.d[0] - e0a1);
  for (int j = 1; j < 24; ++j) {
    const double gap = std::abs(ms.d[uz(j)] - e0a1);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(std::abs(ms.d[16] - e0a1) <= 0.05 * std::abs(e0a1));

  // parallel build agrees bitwise with the serial one
  ModeSystem mp = build_mode_system(s.gas, s.sol, 0.5, 24, 4001, 1e-8, true);
  for (int j = 0; j < 24; ++j) {
    CHECK(mp.d[uz(j)] == ms.d[uz(j)]);
    CHECK(mp.q_shock[uz(j)] == ms.q_shock[uz(j)]);
  }

  CHECK_THROWS_AS((void)build_mode_system(s.gas, s.sol, 0.5, 0, 4001), ValidationError);
  CHECK_THROWS_AS((void)build_mode_system(s.gas, s.sol, -0.5, 8, 4001), ValidationError);
}

TEST_CASE("diagonal derivative action is linear and invertible") {
  const Setup& s = setup();
  ModeSystem ms = build_mode_system(s.gas, s.sol, 0.5, 12, 4001);
  const int nt = 33;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> c1(12), c2(12);
  for (double& c : c1) c = unif(rng);
  for (double& c : c2) c = unif(rng);

  ExitProfile w1 = profile_from_coeffs(0.5, c1, nt);
  ExitProfile w2 = profile_from_coeffs(0.5, c2, nt);

  // linearity at machine precision
  const double alpha = 0.37;
  std::vector<double> cmix(12);
  for (int j = 0; j < 12; ++j) cmix[uz(j)] = alpha * c1[uz(j)] + c2[uz(j)];
  ExitProfile wmix = profile_from_coeffs(0.5, cmix, nt);
  ExitProfile dmix = dvp_apply(ms, wmix);
  ExitProfile d1 = dvp_apply(ms, w1);
  ExitProfile d2 = dvp_apply(ms, w2);
  for (int j = 0; j < 12; ++j) {
    const double lin = alpha * d1.coeff[uz(j)] + d2.coeff[uz(j)];
    CHECK(dmix.coeff[uz(j)] == doctest::Approx(lin).epsilon(1e-13));
  }

  // zero maps to zero
  ExitProfile z = profile_from_coeffs(0.5, std::vector<double>(12, 0.0), nt);
  ExitProfile dz = dvp_apply(ms, z);
  for (double v : dz.value) CHECK(v == 0.0);

  // apply then invert returns the input
  ExitProfile rec = dvp_invert(ms, d1);
  CHECK(max_abs_diff(rec.coeff, c1) <= 1e-10);
  CHECK(max_abs_diff(rec.value, w1.value) <= 1e-10);

  // a multiplier under the kernel floor must refuse inversion, not divide
  ModeSystem broken = ms;
  broken.d[3] = 0.5 * broken.kernel_floor;
  CHECK_THROWS_AS((void)dvp_invert(broken, d1), NearSingularError);
  CHECK_NOTHROW((void)dvp_apply(broken, w1));

  // more modes than the system carries is a shape error
  std::vector<double> big(13, 0.1);
  ExitProfile wide = profile_from_coeffs(0.5, big, nt);
  CHECK_THROWS_AS((void)dvp_apply(ms, wide), ValidationError);
  CHECK_THROWS_AS((void)dvp_invert(ms, wide), ValidationError);
}

TEST_CASE("mode superposition matches the assembled sector solve") {
  const Setup& s = setup();
  const std::vector<double> ctil = {0.7, 1.0, 0.0, 0.4};  // weighted-datum coefficients
  double rel_prev = 0.0;
  for (int gi = 0; gi < 2; ++gi) {
    const int nr = gi == 0 ? 97 : 193;
    const int nt = gi == 0 ? 25 : 49;
    SectorGrid grid = make_sector_grid(s.gas, s.sol, nr, nt, 1.0);
    ModeSystem ms = build_mode_system(s.gas, s.sol, grid.theta_half, 8, 4001);

    PerturbationData data;
    data.theta_half = grid.theta_half;
    for (double c : ctil) data.vex_coeff.push_back(c / ms.flux_weight);
    ShockFront front = flat_front(grid);
    Field2D frozen(Field2D::Quantity::psi, nr, nt);
    LinearSystem sys = assemble_linear_system(s.gas, s.sol, grid, front, frozen, data);
    Field2D psi = solve_linear(sys);

    // the sector solution should be the cosine superposition of radial modes,
    // checked on the shock row and the exit row
    double worst_s = 0.0, worst_e = 0.0, amp_s = 0.0, amp_e = 0.0;
    for (int j = 0; j < nt; ++j) {
      const double theta = grid.theta[uz(j)];
      double ref_s = 0.0, ref_e = 0.0;
      for (std::size_t k = 0; k < ctil.size(); ++k) {
        const double b = cos_mode(static_cast<int>(k), theta, grid.theta_half);
        ref_s += ctil[k] * ms.q_shock[k] * b;
        ref_e += ctil[k] * ms.q[k].back() * b;
      }
      amp_s = std::max(amp_s, std::abs(ref_s));
      amp_e = std::max(amp_e, std::abs(ref_e));
      worst_s = std::max(worst_s, std::abs(psi.at(0, j) - ref_s));
      worst_e = std::max(worst_e, std::abs(psi.at(nr - 1, j) - ref_e));
    }
    const double rel = std::max(worst_s / amp_s, worst_e / amp_e);
    if (gi == 0) {
      CHECK(rel <= 1.5e-3);
      rel_prev = rel;
    } else {
      CHECK(rel <= 4e-4);
      CHECK(rel < 0.6 * rel_prev);
    }
  }
}

TEST_CASE("forward map reduces to the radial background at zero perturbation") {
  const Setup& s = setup();
  const double pc = exit_pressure(s.gas, s.noz, s.inflow, 1.5);
  // frozen reference value for the standard geometry
  CHECK(pc == doctest::Approx(2.7867400342463986).epsilon(1e-12));

  SectorGrid grid = make_sector_grid(s.gas, s.sol, 65, 17, 1.0);
  PerturbationData data;
  data.theta_half = grid.theta_half;
  FlowBundle bundle;
  ExitProfile p = forward_P(s.gas, s.sol, grid, data, InversionOptions{}, &bundle);

  for (double v : p.value) CHECK(std::abs(v - pc) <= 1e-9);
  CHECK(p.coeff[0] == doctest::Approx(pc).epsilon(1e-9));
  for (int j = 1; j < p.n_modes(); ++j) CHECK(std::abs(p.coeff[uz(j)]) <= 1e-9);
  for (double fv : bundle.fbp.front.f) CHECK(std::abs(fv - s.sol.r_s) <= 1e-10);
  CHECK(bundle.pressure.nr == 65);
  CHECK(bundle.pressure.nt == 17);

  // halving a small single-mode datum halves the pressure response
  InversionOptions opt;
  opt.n_modes = 8;
  double norm_prev = -1.0;
  for (double eps : {1e-3, 5e-4, 2.5e-4}) {
    PerturbationData pd;
    pd.theta_half = grid.theta_half;
    pd.vex_coeff = {0.0, eps};
    ExitProfile pe = forward_P(s.gas, s.sol, grid, pd, opt);
    double dev = 0.0;
    for (int j = 0; j < grid.nt; ++j)
      dev = std::max(dev, std::abs(pe.value[uz(j)] - pc));
    if (norm_prev > 0.0) {
      const double ratio = norm_prev / dev;
      CHECK(ratio > 1.7);
      CHECK(ratio < 2.3);
    }
    norm_prev = dev;
  }
}

TEST_CASE("finite differences of the forward map converge to the derivative") {
  const Setup& s = setup();
  const std::vector<double> w = {8.0, 8.0};
  struct Pick {
    double eps;
    int nr, nt;
  };
  // the FD mismatch against the resolved mode derivative carries an O(h^2)
  // floor, so the sweep refines the grid together with eps
  std::vector<double> errs;
  for (Pick pk : {Pick{1e-2, 65, 25}, Pick{1e-3, 193, 65}, Pick{1e-4, 513, 129}}) {
    SectorGrid grid = make_sector_grid(s.gas, s.sol, pk.nr, pk.nt, 1.0);
    ModeSystem ms = build_mode_system(s.gas, s.sol, grid.theta_half, 8, 4001);
    InversionOptions opt;
    opt.n_modes = 8;
    opt.fbp.tol_outer = 1e-9;

    ExitProfile wp = profile_from_coeffs(grid.theta_half, w, pk.nt);
    ExitProfile dw = dvp_apply(ms, wp);
    PerturbationData zero;
    zero.theta_half = grid.theta_half;
    ExitProfile p0 = forward_P(s.gas, s.sol, grid, zero, opt);
    PerturbationData data = zero;
    for (double c : w) data.vex_coeff.push_back(pk.eps * c);
    ExitProfile pe = forward_P(s.gas, s.sol, grid, data, opt);

    double err = 0.0;
    for (int j = 0; j < pk.nt; ++j)
      err = std::max(err, std::abs((pe.value[uz(j)] - p0.value[uz(j)]) / pk.eps - dw.value[uz(j)]));
    errs.push_back(err);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  const double slope = 0.5 * std::log10(errs[0] / errs[2]);
  CHECK(slope >= 0.9);
}

TEST_CASE("constant targets recover the shifted radial family") {
  const Setup& s = setup();
  SectorGrid grid = make_sector_grid(s.gas, s.sol, 97, 25, 1.0);
  ModeSystem ms = build_mode_system(s.gas, s.sol, grid.theta_half, 8, 4001);
  InversionOptions opt;
  opt.n_modes = 8;

  for (double dr : {0.01, -0.02, 0.03}) {
    const double rs2 = s.sol.r_s + dr;
    const double pc2 = exit_pressure(s.gas, s.noz, s.inflow, rs2);
    ExitProfile target =
        profile_from_samples(grid.theta_half, std::vector<double>(uz(grid.nt), pc2), 8);
    PerturbationData base;
    base.theta_half = grid.theta_half;
    InversionResult res = invert_P(s.gas, s.sol, grid, base, target, ms, opt);

    CHECK(res.iterations <= 8);
    REQUIRE(res.residual_history.size() >= 2);
    // strictly decreasing up to convergence; the final entry is the refreshed
    // residual at the returned datum
    for (std::size_t k = 0; k + 2 < res.residual_history.size(); ++k)
      CHECK(res.residual_history[k + 1] < res.residual_history[k]);
    CHECK(res.residual_history.back() <= opt.tol_newton);

    // the recovered front is the shifted radial shock
    double fbar = 0.0, fdev = 0.0;
    for (double fv : res.bundle.fbp.front.f) fbar += fv;
    fbar /= grid.nt;
    for (double fv : res.bundle.fbp.front.f) fdev = std::max(fdev, std::abs(fv - fbar));
    CHECK(std::abs(fbar - rs2) <= 2.0 * grid.hr);
    CHECK(std::abs(fbar - rs2) <= 1e-4);
    CHECK(fdev <= 1e-6);

    // the recovered exit datum is the shifted family's flux
    RadialSolution shifted = background_solution(s.gas, s.noz, s.inflow, rs2);
    const double vc2 = background_exit_flux(s.gas, shifted);
    CHECK(std::abs(res.v_ex.coeff[0] - vc2) <= 2e-4);
    for (int j = 1; j < res.v_ex.n_modes(); ++j)
      CHECK(std::abs(res.v_ex.coeff[uz(j)]) <= 1e-8);
    CHECK(res.p_ex.coeff[0] == doctest::Approx(pc2).epsilon(1e-8));
  }

  // two distinct starts land on the same datum well inside the mandated bound
  const double pc2 = exit_pressure(s.gas, s.noz, s.inflow, 1.51);
  ExitProfile target =
      profile_from_samples(grid.theta_half, std::vector<double>(uz(grid.nt), pc2), 8);
  PerturbationData b1, b2;
  b1.theta_half = grid.theta_half;
  b2.theta_half = grid.theta_half;
  b2.vex_coeff = {0.08, 0.02};
  InversionResult r1 = invert_P(s.gas, s.sol, grid, b1, target, ms, opt);
  InversionResult r2 = invert_P(s.gas, s.sol, grid, b2, target, ms, opt);
  CHECK(max_abs_diff(r1.v_ex.value, r2.v_ex.value) <= 10.0 * opt.tol_newton);
}

TEST_CASE("trivial target returns the background datum") {
  const Setup& s = setup();
  SectorGrid grid = make_sector_grid(s.gas, s.sol, 65, 17, 1.0);
  ModeSystem ms = build_mode_system(s.gas, s.sol, grid.theta_half, 8, 4001);
  InversionOptions opt;
  opt.n_modes = 8;

  const double pc = exit_pressure(s.gas, s.noz, s.inflow, 1.5);
  ExitProfile target =
      profile_from_samples(grid.theta_half, std::vector<double>(uz(grid.nt), pc), 8);
  PerturbationData base;
  base.theta_half = grid.theta_half;
  InversionResult res = invert_P(s.gas, s.sol, grid, base, target, ms, opt);

  CHECK(res.iterations == 1);
  const double vc = background_exit_flux(s.gas, s.sol);
  for (double v : res.v_ex.value) CHECK(std::abs(v - vc) <= 1e-8);
  for (double fv : res.bundle.fbp.front.f) CHECK(std::abs(fv - s.sol.r_s) <= 1e-8);
  for (double v : res.p_ex.value) CHECK(std::abs(v - pc) <= 1e-8);
}

TEST_CASE("inversion reports its failure modes") {
  const Setup& s = setup();
  SectorGrid grid = make_sector_grid(s.gas, s.sol, 65, 17, 1.0);
  ModeSystem ms = build_mode_system(s.gas, s.sol, grid.theta_half, 8, 4001);
  InversionOptions opt;
  opt.n_modes = 8;
  PerturbationData base;
  base.theta_half = grid.theta_half;

  const double pc = exit_pressure(s.gas, s.noz, s.inflow, 1.5);
  const double pc2 = exit_pressure(s.gas, s.noz, s.inflow, 1.51);

  // target sampled off the solver grid
  ExitProfile off = profile_from_samples(grid.theta_half, std::vector<double>(15, pc2), 8);
  CHECK_THROWS_AS((void)invert_P(s.gas, s.sol, grid, base, off, ms, opt), ValidationError);

  // target spanning a different arc
  ExitProfile arc = profile_from_samples(0.4, std::vector<double>(uz(grid.nt), pc2), 8);
  CHECK_THROWS_AS((void)invert_P(s.gas, s.sol, grid, base, arc, ms, opt), ValidationError);

  // spectral content beyond the mode cutoff is refused up front
  std::vector<double> wiggly(uz(grid.nt), pc);
  for (int j = 0; j < grid.nt; ++j)
    wiggly[uz(j)] += 1e-3 * cos_mode(10, grid.theta[uz(j)], grid.theta_half);
  ExitProfile tail = profile_from_samples(grid.theta_half, wiggly, 8);
  CHECK_THROWS_AS((void)invert_P(s.gas, s.sol, grid, base, tail, ms, opt), ValidationError);

  // starting datum wider than the cutoff
  PerturbationData wide = base;
  wide.vex_coeff.assign(9, 0.01);
  ExitProfile target =
      profile_from_samples(grid.theta_half, std::vector<double>(uz(grid.nt), pc2), 8);
  CHECK_THROWS_AS((void)invert_P(s.gas, s.sol, grid, wide, target, ms, opt), ValidationError);

  // a one-iteration budget cannot reach a shifted target
  InversionOptions tight = opt;
  tight.max_newton = 1;
  CHECK_THROWS_AS((void)invert_P(s.gas, s.sol, grid, base, target, ms, tight),
                  NoConvergenceError);
}
