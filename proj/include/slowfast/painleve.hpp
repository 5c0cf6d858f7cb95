#ifndef SLOWFAST_PAINLEVE_HPP
#define SLOWFAST_PAINLEVE_HPP

// Limit systems at fold and cusp points and their integration.
//
// Fold limit (autonomous time Z):
//   X' = -2 s1 Y,   Y' = alpha_c Z + 3 gamma_c X^2,   Z' = 1,
// equivalent to the scalar equation X'' + 2 alpha0 Z + 6 gamma0 X^2 = 0 with
// alpha0 = s1 alpha_c, gamma0 = s1 gamma_c; an affine rescaling X = lx W,
// Z = lz zeta maps it to the first Painleve equation W'' = 6 W^2 + zeta.
//
// Cusp limit:
//   X' = -rho Y,    Y' = A + beta Z X + alpha X^3,    Z' = 1,
// a second-Painleve-type equation in X.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "slowfast/reduction.hpp"

namespace slowfast {

struct PoleInfo {
  enum class Reason { magnitude, step_collapse };
  double z_est = 0;        // pole location fitted from the last samples
  Reason reason = Reason::magnitude;
  double fit_residual = 0; // rms residual of the linear pole fit
};

struct LimitTrajectory {
  std::vector<double> z;
  std::vector<std::array<double, 2>> states;  // (X, Y)
  std::optional<PoleInfo> pole;
  std::optional<double> level_offset;  // cusp blow-up offset C, when known

  std::size_t size() const { return states.size(); }
};

// Which constant multiplies -Y in the cusp limit's X equation.
enum class XdotConstant { rho, sigma };

using LimitField =
    std::function<std::array<double, 2>(double z, double x, double y)>;

// Embedded Dormand-Prince 4/5 integration of (X, Y)' = field(z, X, Y) from
// z0 to z_end.  When `samples` is given, the integrator lands on each sample
// z exactly and the output holds only those points; otherwise every accepted
// step is recorded.  Stops early with pole information when |X| exceeds 1e6
// or the step collapses below 1e-12; `pole_exponent` selects the blow-up
// ansatz for the fit (2: X ~ C/(zp - z)^2, 1: X ~ C/(zp - z)).
LimitTrajectory integrate_limit_field(const LimitField& field,
                                      std::array<double, 2> init, double z0,
                                      double z_end, double tol,
                                      const std::vector<double>* samples,
                                      int pole_exponent);

LimitField fold_limit_field(const FoldLimitSystem& sys);
LimitField cusp_limit_field(const CuspLimitSystem& sys,
                            XdotConstant which = XdotConstant::rho);

LimitTrajectory integrate_painleve_i(const FoldLimitSystem& sys,
                                     std::array<double, 2> init, double z0,
                                     double z_end, double tol);
LimitTrajectory integrate_painleve_ii(const CuspLimitSystem& sys,
                                      std::array<double, 2> init, double z0,
                                      double z_end, double tol,
                                      XdotConstant which = XdotConstant::rho);

struct PiScalingRecord {
  double alpha0 = 0, gamma0 = 0;  // scalar-form coefficients
  double lambda_x = 0, lambda_z = 0;
  double verify_deviation = 0;  // max mismatch of the dual integration check
};

// Affine change of variables to the standard first Painleve form
// W'' = 6 W^2 + zeta; throws ErrorCode::degenerate_coefficients when
// alpha0 or gamma0 is below 1e-12 in magnitude.  The returned scalings are
// verified by integrating both forms at matched points.
PiScalingRecord to_standard_form(const FoldLimitSystem& sys);

struct PiiScalingRecord {
  double lambda_x = 0, lambda_z = 0;
  double a_param = 0;      // forcing constant carried into the scaled form
  bool real_scalings = true;
  double verify_deviation = 0;
};

PiiScalingRecord to_standard_form(const CuspLimitSystem& sys,
                                  XdotConstant which = XdotConstant::rho);

}  // namespace slowfast

#endif
