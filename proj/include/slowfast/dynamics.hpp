#ifndef SLOWFAST_DYNAMICS_HPP
#define SLOWFAST_DYNAMICS_HPP

// Full slow-fast flow in local canonical coordinates:
//   x' = H_y,  y' = -H_x,  u' = eps * H_v,  v' = -eps * H_u,
// integrated with the implicit midpoint rule (symplectic for the constant
// structure given by the pairs (x, y) and (u, v) at fixed eps).

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "slowfast/model.hpp"

namespace slowfast {

struct PhasePoint {
  double x = 0, y = 0, u = 0, v = 0;

  std::array<double, 4> array() const { return {x, y, u, v}; }
  static PhasePoint from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  double operator[](int i) const { return i == 0 ? x : i == 1 ? y : i == 2 ? u : v; }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<double> energy;  // H at each recorded sample
  double epsilon = 0;
  double max_energy_drift = 0;  // max |H - H(start)| over every step taken
  bool aborted = false;         // true when the run stopped early
  std::string abort_reason;

  std::size_t size() const { return states.size(); }
};

// Timescale-split Hamiltonian field; eps >= 0 (eps = 0 freezes the slow pair,
// which yields the fast-layer dynamics).
std::array<double, 4> vector_field_full(const Model& model, const PhasePoint& p,
                                        double eps);

// One implicit midpoint step of size h (h may be negative).  The inner Newton
// solve runs to residual 1e-13 with step damping; failure to converge throws
// ErrorCode::newton_divergence.
PhasePoint step_implicit_midpoint(const Model& model, const PhasePoint& p,
                                  double eps, double h);

// Fixed-step integration from t0 to t1 (h sign must match the direction).
// Records every `stride`-th step plus the endpoint.  On Newton failure the
// partial trajectory is returned with `aborted` set.
Trajectory integrate(const Model& model, const PhasePoint& p0, double eps,
                     double t0, double t1, double h, int stride = 1);

// Steps while `keep_going(current)` holds, up to max_steps; same recording
// and abort conventions as integrate().
Trajectory integrate_while(const Model& model, const PhasePoint& p0, double eps,
                           double h,
                           const std::function<bool(const PhasePoint&)>& keep_going,
                           long max_steps, int stride = 1);

// Fast layer at frozen (u0, v0): the planar Hamiltonian flow of
// H(., ., u0, v0) in scaled time, starting from (x0, y0).
Trajectory integrate_fast_layer(const Model& model, double u0, double v0,
                                double x0, double y0, double tau0, double tau1,
                                double h, int stride = 1);

}  // namespace slowfast

#endif
