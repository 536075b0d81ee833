#pragma once

#include <functional>
#include <vector>

#include "transonic/elliptic.hpp"
#include "transonic/gas.hpp"
#include "transonic/radial.hpp"
#include "transonic/util.hpp"

namespace transonic {

// slope field of the entropy-transport characteristics, sampled on a grid
// that is uniform in the straightened radius. The straightening maps the
// curved shock to the circle r = r_s, so every characteristic starts on
// that circle and marches outward with unit radial speed.
struct CharField {
  int nr = 0, nt = 0;
  double r_s = 0.0, r1 = 0.0;
  double theta_half = 0.0;
  std::vector<double> rt;     // uniform straightened radius samples
  std::vector<double> theta;  // angular nodes, shared with the solver grid
  std::vector<double> w2;     // angular slope dtheta/d(rt) of characteristics
  double omega0 = 0.0;        // verified floor of the radial advection speed
  double slope_min = 0.0;     // measured minimum of d(rt)/dr over the grid
  double blowup_guard = 0.0;  // slope magnitude treated as a failed step
  double h_trace = 0.0;       // nominal step length for traces

  double w2_at(int i, int j) const {
    return w2[static_cast<std::size_t>(i) * nt + j];
  }
  // bilinear between nodes, clamped to the grid box
  double w2_interp(double rt_q, double theta_q) const;
};

// one backward-traced characteristic; the radius leg is linear in the
// parameter by construction, so x1[k] == 2*launch_radius - t[k] exactly
struct Characteristic {
  std::vector<double> t;
  std::vector<double> x1;  // straightened radius, decreasing to r_s
  std::vector<double> x2;  // angle
  double source = 0.0;     // angle where the trace meets the shock circle
};

// builds the straightening map and slope field from a converged
// free-boundary solution; verifies monotonicity of the map and the radial
// speed floor before resampling onto the uniform straightened grid.
// tol_bc bounds the wall slip relative to the slope-field scale.
CharField build_char_field(const GasModel& gas, const RadialSolution& sol,
                           const SectorGrid& grid, const ShockFront& front,
                           const Field2D& psi, const PerturbationData& data,
                           double tol_bc = 1e-3);

// fixed-step RK4 march from (r, theta) down to the shock circle; the angle
// is clamped to the walls, consistent with slip
Characteristic trace_characteristic(const CharField& field, double r,
                                    double theta);

// foot-angle difference between a trace at the nominal step and one at half
// the step, for a per-run accuracy check
double trace_halving_gap(const CharField& field, double r, double theta);

// transported quantity on the straightened grid: each node takes the shock
// value at the foot of its characteristic. e_init_fn must be thread safe
// when parallel is set.
Field2D transport_E(const CharField& field,
                    const std::function<double(double)>& e_init_fn,
                    bool parallel = false);

// shock values of the transported quantity as a smooth function of angle,
// built from the converged front and potential
CubicCurve e_init_curve(const GasModel& gas, const RadialSolution& sol,
                        const SectorGrid& grid, const ShockFront& front,
                        const Field2D& psi, const PerturbationData& data);

// pressure on the solver grid from the head factor and the transported
// quantity pulled back through the straightening map
Field2D reconstruct_pressure(const GasModel& gas, const RadialSolution& sol,
                             const SectorGrid& grid, const ShockFront& front,
                             const Field2D& psi, const PerturbationData& data,
                             const CharField& field, const Field2D& e_field);

}  // namespace transonic
