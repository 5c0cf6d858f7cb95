#ifndef SLOWFAST_SLOW_MANIFOLD_HPP
#define SLOWFAST_SLOW_MANIFOLD_HPP

// The slow manifold SM = {H_x = H_y = 0}, its local graph charts, the
// discriminant Delta = H_xy^2 - H_yy H_xx whose zero set on SM is the
// singular curve, continuation of that curve, and the classification of
// singular points into fold / cusp / degenerate.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "slowfast/dynamics.hpp"
#include "slowfast/model.hpp"

namespace slowfast {

enum class Classification { regular, fold, cusp, degenerate };
enum class DegenerateReason {
  none,             // not degenerate
  rank_deficient,   // second-derivative matrix of (H_x, H_y) has rank < 2
  fast_block_only,  // only the (u, v) columns carry the rank: no usable chart
  criteria_conflict, // the g-based and Delta-based fold tests disagree
  chart_failure,    // no chart could be solved near the point
  unclassified      // beyond cusp order (e.g. g_x = g_xx = g_xxx = 0)
};

const char* classification_name(Classification c);
const char* degenerate_reason_name(DegenerateReason r);

// Local graph chart of SM.  In standard roles the chart solves (y, u) as
// functions of the free pair (x, v):  y = f(x, v), u = g(x, v).  Roles may
// be permuted (fast_free selects which of x, y stays free; slow_free selects
// which of u, v stays free); the named partials always refer to the chart's
// own free variables.
struct SmChart {
  int fast_free = 0;  // variable index (0 = x, 1 = y) kept free
  int slow_free = 3;  // variable index (2 = u, 3 = v) kept free
  double x = 0, v = 0;  // values of the free pair
  double f = 0, g = 0;  // solved fast value and solved slow value
  double f_x = 0, f_v = 0;
  double g_x = 0, g_xx = 0, g_xxx = 0, g_xv = 0, g_v = 0;
  double conditioning = 0;  // |2x2 minor| pivoting the implicit solve
  Jet f_jet, g_jet;         // expansions in the free displacements

  PhasePoint point() const;  // the chart's base point in (x, y, u, v)
};

// Solves the fast equilibrium (x, y) at frozen (u, v) by Newton from guess.
std::array<double, 2> solve_critical_point(const Model& model, double u,
                                           double v,
                                           std::array<double, 2> guess);

// Standard-role chart at free values (x, v) from fast/slow guesses.
SmChart sm_chart(const Model& model, double x, double v, double y_guess,
                 double u_guess, int degree = 4);

// Chart with explicit role choice; (a, b) are the free fast / slow values.
SmChart chart_with_roles(const Model& model, int fast_free, int slow_free,
                         double a, double b, double fast_guess,
                         double slow_guess, int degree = 4);

double delta(const Model& model, const PhasePoint& p);
std::array<double, 4> delta_gradient(const Model& model, const PhasePoint& p);

// Pseudo-arclength continuation of {H_x = 0, H_y = 0, Delta = 0} from a seed
// on the singular curve.  Returns the polyline including the (corrected)
// seed; throws ErrorCode::continuation_stall when a step fails after three
// halvings.
std::vector<PhasePoint> trace_singular_curve(const Model& model,
                                             const PhasePoint& seed, int steps,
                                             double ds);

struct SingularPointRecord {
  PhasePoint location;
  Classification classification = Classification::degenerate;
  DegenerateReason reason = DegenerateReason::none;
  double delta_value = 0;
  // Criterion values: g_x, g_xx, g_xxx, g_xv, delta, delta_x (derivative of
  // Delta along the chart's free fast direction), transversality (the slow
  // regularity bracket), rank_indicator, chart_minor, and the tolerances
  // tol_* they were compared against.
  std::map<std::string, double> margins;
  double zero_tolerance = 0;  // base relative tolerance
  bool chart_valid = false;
  SmChart chart;
};

// Classifies a point of SM (|H_x|, |H_y| residual below 1e-8 scale required).
SingularPointRecord classify_singular_point(const Model& model,
                                            const PhasePoint& p);

struct SlowSample {
  double h = 0;                          // H restricted to SM
  double h_u = 0, h_v = 0;               // envelope derivatives (H_u, H_v)
  std::array<double, 2> critical_point;  // the (x, y) branch used
  std::array<double, 2> slow_field;      // (h_v, -h_u)
};

// Slow Hamiltonian on a branch of SM near the given fast guess.
SlowSample slow_hamiltonian(const Model& model, double u, double v,
                            std::array<double, 2> branch_guess);

}  // namespace slowfast

#endif
