#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "transonic/errors.hpp"
#include "transonic/radial.hpp"

using namespace transonic;

namespace {

const FlowState kInflow{1.0, 2.0, 1.0};

GasModel reference_gas() { return make_gas(1.4, kInflow); }

}  // namespace

TEST_CASE("radial slopes at the inflow station") {
  const GasModel gas = reference_gas();
  const OdeRhs rhs = rhs_ode(gas, 2, 1.0, 2.0, 1.0);
  CHECK(rhs.du_dr == doctest::Approx(5.6 / 5.2).epsilon(1e-14));
  CHECK(rhs.dp_dr == doctest::Approx(-11.2 / 5.2).epsilon(1e-14));
}

TEST_CASE("radial slopes blow up at the sonic radius") {
  const GasModel gas = reference_gas();
  const double u_sonic = std::sqrt(gas.k0());
  CHECK_THROWS_AS((void)rhs_ode(gas, 2, 1.2, u_sonic, 1.0), SonicSingularityError);
}

TEST_CASE("supersonic branch accelerates and conserves the Bernoulli head") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  const RadialBranch b = integrate_branch(gas, noz, 1.0, 2.0, 2.0, 1.0, 1e-3);
  REQUIRE(b.r.size() > 10);
  CHECK(b.kind == BranchKind::Supersonic);
  for (std::size_t k = 1; k < b.r.size(); ++k) {
    CHECK(b.u[k] > b.u[k - 1]);
    CHECK(b.p[k] < b.p[k - 1]);
    CHECK(b.rho[k] < b.rho[k - 1]);
  }
  for (std::size_t k = 0; k < b.r.size(); k += 97) {
    const FlowState s{b.rho[k], b.u[k], b.p[k]};
    CHECK(bernoulli(gas, s) == doctest::Approx(gas.b0).epsilon(1e-11));
  }
}

TEST_CASE("integrator converges at fourth order") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  auto end_u = [&](double h) {
    const RadialBranch b = integrate_branch(gas, noz, 1.0, 1.5, 2.0, 1.0, h);
    return b.u.back();
  };
  const double ref = end_u(1.0 / 4096.0);
  const double e1 = std::abs(end_u(1.0 / 64.0) - ref);
  const double e2 = std::abs(end_u(1.0 / 128.0) - ref);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 3.9);
  CHECK(order <= 4.5);
}

TEST_CASE("background solution is continuous and jump-consistent at the shock") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  const RadialSolution sol = background_solution(gas, noz, kInflow, 1.5);

  CHECK(sol.r_s == doctest::Approx(1.5));
  // the shock radius is an exact sample of both branches
  CHECK(sol.u_minus(sol.r_s) == doctest::Approx(sol.jump.upstream.u).epsilon(1e-14));
  CHECK(sol.p_minus(sol.r_s) == doctest::Approx(sol.jump.upstream.p).epsilon(1e-14));
  CHECK(sol.u_plus(sol.r_s) == doctest::Approx(sol.jump.downstream.u).epsilon(1e-14));
  CHECK(sol.p_plus(sol.r_s) == doctest::Approx(sol.jump.downstream.p).epsilon(1e-14));
  // potential is glued continuously across the shock
  CHECK(sol.phi_minus(sol.r_s) == doctest::Approx(sol.phi_plus(sol.r_s)).epsilon(1e-13));
  // downstream the flow decelerates and recompresses
  CHECK(sol.u_plus(noz.r1) < sol.jump.downstream.u);
  CHECK(sol.p_plus(noz.r1) > sol.jump.downstream.p);
  // branches extend past the shock by the continuation margin
  CHECK(sol.sup.r_hi() == doctest::Approx(noz.r1));
  CHECK(sol.sub.r_lo() == doctest::Approx(sol.r_s - 2.0 * noz.delta));
  CHECK_THROWS_AS((void)sol.sub.eval_u(sol.sub.r_lo() - 0.01), DomainError);
}

TEST_CASE("exit pressure decreases strictly in the shock radius") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  double prev = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double r_s = 1.1 + 0.8 * k / 19.0;
    const double pe = exit_pressure(gas, noz, kInflow, r_s);
    if (k > 0) CHECK(pe < prev);
    prev = pe;
  }
}

TEST_CASE("shock location round-trips the exit pressure") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  for (double r_s : {1.23, 1.5, 1.81}) {
    const double pc = exit_pressure(gas, noz, kInflow, r_s);
    const double found = locate_shock(gas, noz, kInflow, pc);
    CHECK(std::abs(found - r_s) <= 1e-8);
  }
  CHECK_THROWS_AS((void)locate_shock(gas, noz, kInflow, 50.0), PressureOutOfRangeError);
  CHECK_THROWS_AS((void)locate_shock(gas, noz, kInflow, 1e-3), PressureOutOfRangeError);
}

TEST_CASE("local shock coefficient agrees with the branch derivative identity") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  const RadialSolution sol = background_solution(gas, noz, kInflow, 1.5);
  const double m0 = mu0(gas, noz, sol);
  CHECK(m0 > 0.0);
  // d/dr of the jump of the oblique datum equals the explicit closed form
  const double um = sol.jump.upstream.u;
  const double dum = sol.du_minus(sol.r_s);
  const double dup = sol.du_plus(sol.r_s);
  const double lhs = -gas.k0() * dum / (um * um) - dup;
  const double rhs = 2.0 * (noz.n - 1) * gas.gamma * gas.k0() /
                     ((gas.gamma + 1.0) * sol.r_s * um);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  CHECK(m0 == doctest::Approx(rhs / (um - sol.jump.downstream.u)).epsilon(1e-12));
}

TEST_CASE("pressure slope gap matches a finite difference of the two closures") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  const RadialSolution sol = background_solution(gas, noz, kInflow, 1.5);
  const double gap = shock_pressure_slope_gap(gas, noz, sol);
  CHECK(gap < 0.0);

  auto diff = [&](double f) {
    const FlowState up{sol.rho_minus(f), sol.u_minus(f), sol.p_minus(f)};
    return rh_jump_radial(gas, up).downstream.p - sol.p_plus(f);
  };
  const double h = 1e-5;
  const double fd = (diff(sol.r_s + h) - diff(sol.r_s - h)) / (2.0 * h);
  CHECK(gap == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("isentropic family pins the exit state independently of the shock radius") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  for (double flux : {0.3, 0.45}) {
    const IsentropicExit a = isentropic_radial_family(gas, noz, flux, 1.3);
    const IsentropicExit b = isentropic_radial_family(gas, noz, flux, 1.7);
    CHECK(a.exit_u == doctest::Approx(b.exit_u).epsilon(1e-12));
    CHECK(a.exit_p == doctest::Approx(b.exit_p).epsilon(1e-12));
  }
  const IsentropicExit still = isentropic_radial_family(gas, noz, 0.0, 1.5);
  CHECK(still.exit_u == doctest::Approx(0.0));
  CHECK(still.exit_p == doctest::Approx(1.0 / gas.gamma).epsilon(1e-13));
}

TEST_CASE("domain validation of the radial drivers") {
  const GasModel gas = reference_gas();
  const NozzleRadial noz(1.0, 2.0, 2);
  CHECK_THROWS_AS((void)background_solution(gas, noz, kInflow, 0.9), DomainError);
  CHECK_THROWS_AS((void)background_solution(gas, noz, kInflow, 2.1), DomainError);
  CHECK_THROWS_AS((void)integrate_branch(gas, noz, 1.0, 2.0, std::sqrt(gas.k0()), 1.0, 1e-3),
                  ValidationError);
  CHECK_THROWS_AS(NozzleRadial(2.0, 1.0, 2), ValidationError);
}
