#ifndef SLOWFAST_REDUCTION_HPP
#define SLOWFAST_REDUCTION_HPP

// Isoenergetic reduction on a level H = c.  On a branch where H_v != 0 the
// level equation is solved for v = S(x, y, u) and u becomes the time-like
// variable; on a branch where H_u != 0 it is solved for u = S(x, y, v) with
// time-like v.  In both cases the reduced planar system is
//   dx/d(time) = -dS/dy,   dy/d(time) = dS/dx,
// which coincides with the rescaled restriction of the full flow:
//   (-S_y, S_x) = (H_y / H_pivot, -H_x / H_pivot).
//
// The fold and cusp limit systems collect the Taylor data of S at the trace
// of the singular curve on the level.

#include <array>

#include "slowfast/dynamics.hpp"
#include "slowfast/model.hpp"
#include "slowfast/slow_manifold.hpp"

namespace slowfast {

enum class Branch { solve_for_v, solve_for_u };

class ReducedSystem {
 public:
  // Throws ErrorCode::branch_invalid when |H_pivot| <= 1e-10 at a queried
  // point (checked on every solve).
  ReducedSystem(Model model, double c, Branch branch);

  const Model& model() const { return model_; }
  double level() const { return c_; }
  Branch branch() const { return branch_; }
  int pivot_var() const;  // 3 (v) or 2 (u)
  int time_var() const;   // 2 (u) or 3 (v)

  // S(x, y, t) where t is the time-like slow variable; Newton from guess.
  double solve(double x, double y, double t, double pivot_guess) const;

  // Taylor expansion of S in (dx, dy, dt) about the given base point.
  Jet jet(double x, double y, double t, double pivot_guess, int degree) const;

  // (dx/dt, dy/dt) = (-S_y, S_x) at the point.
  std::array<double, 2> field(double x, double y, double t,
                              double pivot_guess) const;

 private:
  std::array<double, 4> assemble(double x, double y, double t,
                                 double pivot) const;

  Model model_;
  double c_;
  Branch branch_;
};

struct SingularTrace {
  double c = 0;
  PhasePoint point;
  double transversality = 0;  // slow-regularity bracket at the trace
};

// Intersection of the singular curve with {H = c} by Newton from guess
// (default: the origin).  A rank-deficient system is accepted when the guess
// already satisfies all four equations (tangent crossing); otherwise it
// throws ErrorCode::transversality_failure.
SingularTrace singular_trace_on_level(const Model& model, double c,
                                      const PhasePoint& guess = {});

struct FoldLimitSystem {
  double alpha_c = 0;  // dS^2/dx du at the trace
  double gamma_c = 0;  // (1/6) dS^3/dx^3 at the trace
  double s1 = 0;       // (1/2) dS^2/dy^2 at the trace
  SingularTrace trace;
  double alpha_residual = 0;  // |dS/dx| at the trace (fold validity: ~0)
  double beta_residual = 0;   // |dS^2/dx^2 / 2| at the trace (~0)
};

// Requires a fold classification at the trace; validity failure beyond the
// scaled tolerance throws ErrorCode::not_a_fold.
FoldLimitSystem fold_coefficients(const Model& model, double c,
                                  const PhasePoint& guess = {});

struct CuspLimitSystem {
  double rho = 0;       // H_yy * sigma at the trace
  double sigma = 0;     // 1 / H_u at the trace
  double beta = 0;      // -dS^3/dx^2 dv at the trace
  double alpha = 0;     // -(1/6) dS^4/dx^4 at the trace
  double a_offset = 0;  // forcing constant; filled from data by the studies
  double beta_literal = 0;    // sigma * d^4 H / dx^2 du dv at the trace
  double genericity_det = 0;  // det d(H_x, H_xx)/d(u, v) at the trace
  bool generic = true;        // false when the slow unfolding is degenerate
  SingularTrace trace;
};

// Requires cusp-type contact at the trace (g_x, g_xx below tolerance and
// g_xxx above); a vanishing g_xv is accepted but flagged via `generic`.
// Anything else throws ErrorCode::not_a_cusp.
CuspLimitSystem cusp_coefficients(const Model& model, double c,
                                  const PhasePoint& guess = {});

struct NormalShiftReport {
  double max_residual = 0;  // max |H_y| over the sampled graph points
  int samples = 0;
};

// Witness that the fast-normal shift keeps SM points at critical points of
// the shifted fast energy: samples (x, u, v) in a box around `center`,
// solves y from H_y = 0, and reports the residual.
NormalShiftReport normal_shift_check(const Model& model,
                                     const PhasePoint& center,
                                     double half_width, int samples,
                                     std::uint64_t seed);

}  // namespace slowfast

#endif
