#ifndef SLOWFAST_VERIFY_HPP
#define SLOWFAST_VERIFY_HPP

// Numerical checks of the structural claims:
//  - form_determinants: at a regular SM point the pulled-back two-form ratio
//    det D is a polynomial 1 + f1 eps + f2 eps^2 in eps with f0 = 1;
//  - blowup_rescale: maps a full trajectory into blow-up coordinates at a
//    fold (r = eps^(1/5)) or cusp (r = eps^(1/3)) trace;
//  - convergence_study: sup-norm deviation between rescaled full trajectories
//    and the integrated limit system across a decreasing ladder of eps.

#include <array>
#include <optional>
#include <vector>

#include "slowfast/dynamics.hpp"
#include "slowfast/model.hpp"
#include "slowfast/painleve.hpp"
#include "slowfast/reduction.hpp"

namespace slowfast {

enum class SingKind { fold, cusp };

struct RescaleParams {
  SingKind kind = SingKind::fold;
  double epsilon = 0;
  double r = 0;  // eps^(1/5) at folds, eps^(1/3) at cusps
  SingularTrace trace;

  static RescaleParams from_epsilon(SingKind kind, double eps,
                                    const SingularTrace& trace);
};

struct FormDeterminantReport {
  double epsilon = 0;
  double w = 0;   // mixed graph-derivative bracket X_u Y_v - X_v Y_u
  double f0 = 0, f1 = 0, f2 = 0;  // det D = f0 + f1 eps + f2 eps^2
  double det_d = 0;               // det D at epsilon itself
  double det_c = 0;               // full-space form determinant (chart basis)
};

// Evaluates the determinant identities at a regular SM point (fast Hessian
// nonsingular, |H_x|, |H_y| residual below 1e-8).
FormDeterminantReport form_determinants(const Model& model,
                                        const PhasePoint& sm_point, double eps);

// Rescales a full trajectory into blow-up coordinates; throws
// ErrorCode::mismatched_epsilon when the trajectory's eps differs from the
// params'.  Output samples are ordered by increasing Z.  For cusps the level
// offset C = (u - u_c) / r^3 at the first sample is recorded.
LimitTrajectory blowup_rescale(const Trajectory& traj,
                               const RescaleParams& params);

enum class BetaVariant { a2_v, literal };

struct StudyRow {
  double epsilon = 0;
  double r = 0;
  double sup_dev = 0;  // sup-norm deviation of X over the compared window
  double q_fit = 0;    // fitted order vs the previous row (NaN on the first)
  double a_offset = 0; // cusp forcing constant used for this epsilon
};

struct StudyOptions {
  SingKind kind = SingKind::fold;
  double h_divisor = 5;       // full-system step h = eps / h_divisor
  double limit_tol = 1e-10;   // limit-system integration tolerance
  int record_cap = 16384;     // max recorded full-system samples per run
  BetaVariant beta_variant = BetaVariant::a2_v;
  XdotConstant xdot_constant = XdotConstant::rho;
};

struct ConvergenceStudy {
  SingKind kind = SingKind::fold;
  double c = 0;
  std::array<double, 2> window{};
  std::array<double, 2> init{};
  std::vector<StudyRow> rows;
  bool decreasing = false;  // sup_dev strictly decreasing down the ladder
  // Cusp only: the same comparison against the limit built with the other
  // beta variant, recorded for arbitration.
  std::vector<StudyRow> other_variant_rows;
  bool other_variant_decreasing = false;
  std::optional<FoldLimitSystem> fold;
  std::optional<CuspLimitSystem> cusp;
};

// Runs the ladder of eps values: each full trajectory is integrated across
// the blow-up window, rescaled, and compared point-for-point with the limit
// system started from the matched initial data (the limit integrator lands
// exactly on the recorded sample Z values, so no interpolation enters the
// deviation).  The model must classify as the requested kind at the trace
// (ErrorCode::classification_mismatch otherwise); a limit-system pole inside
// the window throws ErrorCode::pole_in_window.
ConvergenceStudy convergence_study(const Model& model, double c,
                                   const std::vector<double>& epsilons,
                                   std::array<double, 2> z_window,
                                   std::array<double, 2> matched_init,
                                   const StudyOptions& options);

}  // namespace slowfast

#endif
