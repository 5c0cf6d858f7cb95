#include "slowfast/painleve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace slowfast {

namespace {

constexpr double kPoleMagnitude = 1e6;
constexpr double kStepFloor = 1e-12;
constexpr long kMaxAttempts = 20000000;

using State = std::array<double, 2>;

struct DormandPrince {
  // Classic 5(4) pair.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                          e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                          e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

State axpy(const State& base, double h, const State& k) {
  return {base[0] + h * k[0], base[1] + h * k[1]};
}

// Least-squares line fit q = a + b z over the tail of the trajectory, where
// q = |X|^(-1/pole_exponent_inverse); the fitted root gives the pole site.
PoleInfo fit_pole(const std::deque<std::pair<double, double>>& hist,
                  PoleInfo::Reason reason, int pole_exponent, double z_last) {
  PoleInfo info;
  info.reason = reason;
  info.z_est = z_last;

  std::vector<std::pair<double, double>> pts;
  for (const auto& [z, x] : hist) {
    double ax = std::abs(x);
    if (ax < 10.0) continue;
    double q = pole_exponent == 2 ? 1.0 / std::sqrt(ax) : 1.0 / ax;
    pts.emplace_back(z, q);
  }
  if (pts.size() < 2) return info;

  double sz = 0, sq = 0, szz = 0, szq = 0;
  for (const auto& [z, q] : pts) {
    sz += z;
    sq += q;
    szz += z * z;
    szq += z * q;
  }
  double n = static_cast<double>(pts.size());
  double denom = n * szz - sz * sz;
  if (std::abs(denom) < 1e-300) return info;
  double b = (n * szq - sz * sq) / denom;
  double a = (sq - b * sz) / n;
  if (b == 0.0) return info;
  info.z_est = -a / b;
  double ss = 0;
  for (const auto& [z, q] : pts) {
    double r = q - (a + b * z);
    ss += r * r;
  }
  info.fit_residual = std::sqrt(ss / n);
  return info;
}

}  // namespace

LimitTrajectory integrate_limit_field(const LimitField& field, State init,
                                      double z0, double z_end, double tol,
                                      const std::vector<double>* samples,
                                      int pole_exponent) {
  if (!(tol > 0)) fail(ErrorCode::invalid_argument, "tolerance must be positive");
  if (pole_exponent != 1 && pole_exponent != 2)
    fail(ErrorCode::invalid_argument, "pole_exponent must be 1 or 2");

  LimitTrajectory traj;
  const double dir = z_end >= z0 ? 1.0 : -1.0;
  double z = z0;
  State y = init;

  std::size_t sample_idx = 0;
  auto record_if_sample = [&](double zq, const State& yq) {
    if (samples) {
      while (sample_idx < samples->size() &&
             (*samples)[sample_idx] * dir <= zq * dir + 1e-13) {
        traj.z.push_back((*samples)[sample_idx]);
        traj.states.push_back(yq);
        ++sample_idx;
      }
    } else {
      traj.z.push_back(zq);
      traj.states.push_back(yq);
    }
  };

  std::deque<std::pair<double, double>> hist;
  hist.emplace_back(z, y[0]);
  record_if_sample(z, y);

  if (z0 == z_end) return traj;

  double h = dir * std::max(1e-6, std::abs(z_end - z0) / 100.0);
  using DP = DormandPrince;

  for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (std::abs(y[0]) > kPoleMagnitude) {
      traj.pole = fit_pole(hist, PoleInfo::Reason::magnitude, pole_exponent, z);
      return traj;
    }
    if ((z_end - z) * dir <= 0) return traj;
    if (samples && sample_idx >= samples->size()) return traj;

    // Clip the trial step to the next landing target.
    double target = z_end;
    if (samples && sample_idx < samples->size()) {
      double next = (*samples)[sample_idx];
      if ((next - z) * dir > 0 && (next - target) * dir < 0) target = next;
    }
    double h_trial = h;
    bool clipped = false;
    if ((z + h_trial - target) * dir > 0) {
      h_trial = target - z;
      clipped = true;
    }
    if (std::abs(h_trial) < kStepFloor) {
      traj.pole =
          fit_pole(hist, PoleInfo::Reason::step_collapse, pole_exponent, z);
      return traj;
    }

    State k1 = field(z, y[0], y[1]);
    State s2 = axpy(y, h_trial * DP::a21, k1);
    State k2 = field(z + DP::c2 * h_trial, s2[0], s2[1]);
    State s3 = {y[0] + h_trial * (DP::a31 * k1[0] + DP::a32 * k2[0]),
                y[1] + h_trial * (DP::a31 * k1[1] + DP::a32 * k2[1])};
    State k3 = field(z + DP::c3 * h_trial, s3[0], s3[1]);
    State s4 = {
        y[0] + h_trial * (DP::a41 * k1[0] + DP::a42 * k2[0] + DP::a43 * k3[0]),
        y[1] + h_trial * (DP::a41 * k1[1] + DP::a42 * k2[1] + DP::a43 * k3[1])};
    State k4 = field(z + DP::c4 * h_trial, s4[0], s4[1]);
    State s5 = {y[0] + h_trial * (DP::a51 * k1[0] + DP::a52 * k2[0] +
                                  DP::a53 * k3[0] + DP::a54 * k4[0]),
                y[1] + h_trial * (DP::a51 * k1[1] + DP::a52 * k2[1] +
                                  DP::a53 * k3[1] + DP::a54 * k4[1])};
    State k5 = field(z + DP::c5 * h_trial, s5[0], s5[1]);
    State s6 = {y[0] + h_trial * (DP::a61 * k1[0] + DP::a62 * k2[0] +
                                  DP::a63 * k3[0] + DP::a64 * k4[0] +
                                  DP::a65 * k5[0]),
                y[1] + h_trial * (DP::a61 * k1[1] + DP::a62 * k2[1] +
                                  DP::a63 * k3[1] + DP::a64 * k4[1] +
                                  DP::a65 * k5[1])};
    State k6 = field(z + h_trial, s6[0], s6[1]);
    State y5 = {y[0] + h_trial * (DP::b1 * k1[0] + DP::b3 * k3[0] +
                                  DP::b4 * k4[0] + DP::b5 * k5[0] +
                                  DP::b6 * k6[0]),
                y[1] + h_trial * (DP::b1 * k1[1] + DP::b3 * k3[1] +
                                  DP::b4 * k4[1] + DP::b5 * k5[1] +
                                  DP::b6 * k6[1])};
    State k7 = field(z + h_trial, y5[0], y5[1]);
    State y4 = {y[0] + h_trial * (DP::e1 * k1[0] + DP::e3 * k3[0] +
                                  DP::e4 * k4[0] + DP::e5 * k5[0] +
                                  DP::e6 * k6[0] + DP::e7 * k7[0]),
                y[1] + h_trial * (DP::e1 * k1[1] + DP::e3 * k3[1] +
                                  DP::e4 * k4[1] + DP::e5 * k5[1] +
                                  DP::e6 * k6[1] + DP::e7 * k7[1])};

    double err = 0;
    for (int i = 0; i < 2; ++i) {
      double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      double e = (y5[i] - y4[i]) / sc;
      err += e * e;
    }
    err = std::sqrt(0.5 * err);

    if (err <= 1.0 && std::isfinite(y5[0]) && std::isfinite(y5[1])) {
      z = clipped ? target : z + h_trial;
      y = y5;
      hist.emplace_back(z, y[0]);
      if (hist.size() > 10) hist.pop_front();
      record_if_sample(z, y);
    }

    double factor = err <= 1e-30 ? 5.0
                                 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    double h_next = h_trial * factor;
    if (!clipped || std::abs(h_next) < std::abs(h)) h = h_next;
    if (std::abs(h) < kStepFloor) {
      traj.pole =
          fit_pole(hist, PoleInfo::Reason::step_collapse, pole_exponent, z);
      return traj;
    }
  }
  fail(ErrorCode::internal, "adaptive integrator exceeded the attempt budget");
}

LimitField fold_limit_field(const FoldLimitSystem& sys) {
  const double s1 = sys.s1, ac = sys.alpha_c, gc = sys.gamma_c;
  return [s1, ac, gc](double z, double x, double y) -> State {
    return {-2.0 * s1 * y, ac * z + 3.0 * gc * x * x};
  };
}

LimitField cusp_limit_field(const CuspLimitSystem& sys, XdotConstant which) {
  const double r = which == XdotConstant::rho ? sys.rho : sys.sigma;
  const double a = sys.a_offset, b = sys.beta, al = sys.alpha;
  return [r, a, b, al](double z, double x, double y) -> State {
    return {-r * y, a + b * z * x + al * x * x * x};
  };
}

LimitTrajectory integrate_painleve_i(const FoldLimitSystem& sys, State init,
                                     double z0, double z_end, double tol) {
  return integrate_limit_field(fold_limit_field(sys), init, z0, z_end, tol,
                               nullptr, 2);
}

LimitTrajectory integrate_painleve_ii(const CuspLimitSystem& sys, State init,
                                      double z0, double z_end, double tol,
                                      XdotConstant which) {
  return integrate_limit_field(cusp_limit_field(sys, which), init, z0, z_end,
                               tol, nullptr, 1);
}

//----------------------------------------------------------------------------

namespace {

double real_root(double value, int n) {
  // Real n-th root preserving sign (n odd).
  return value >= 0 ? std::pow(value, 1.0 / n) : -std::pow(-value, 1.0 / n);
}

// Max |lambda_x W(zeta) - X(lambda_z zeta)| over matched sample points.
double dual_check(const LimitField& original, const LimitField& standard,
                  double lambda_x, double lambda_z, State orig_init,
                  double zeta_span) {
  const int n = 20;
  std::vector<double> zetas(n);
  for (int i = 0; i < n; ++i) zetas[i] = zeta_span * (i + 1) / n;

  // Original samples at Z = lambda_z zeta; zs is already ordered along the
  // direction of integration (both grow away from 0 with the sign of
  // lambda_z).
  std::vector<double> zs(n);
  for (int i = 0; i < n; ++i) zs[i] = lambda_z * zetas[i];
  auto orig = integrate_limit_field(original, orig_init, 0.0,
                                    lambda_z * zeta_span, 1e-10, &zs, 2);
  if (orig.size() != static_cast<std::size_t>(n)) return 1e300;

  // Standard-form run from the matched initial data.
  double x0 = orig_init[0];
  State k0 = original(0.0, orig_init[0], orig_init[1]);
  double w0 = x0 / lambda_x;
  double p0 = k0[0] * lambda_z / lambda_x;  // dW/dzeta at 0
  auto std_traj = integrate_limit_field(standard, {w0, p0}, 0.0, zeta_span,
                                        1e-10, &zetas, 2);
  if (std_traj.size() != static_cast<std::size_t>(n)) return 1e300;

  double dev = 0;
  for (int i = 0; i < n; ++i) {
    dev = std::max(dev, std::abs(lambda_x * std_traj.states[i][0] -
                                 orig.states[i][0]));
  }
  return dev;
}

}  // namespace

PiScalingRecord to_standard_form(const FoldLimitSystem& sys) {
  PiScalingRecord rec;
  rec.alpha0 = sys.s1 * sys.alpha_c;
  rec.gamma0 = sys.s1 * sys.gamma_c;
  if (std::abs(rec.alpha0) < 1e-12 || std::abs(rec.gamma0) < 1e-12)
    fail(ErrorCode::degenerate_coefficients,
         "standard-form map undefined: alpha0 = " + std::to_string(rec.alpha0) +
             ", gamma0 = " + std::to_string(rec.gamma0));
  // lambda_z^5 = 1 / (2 alpha0 gamma0); lambda_x = -1 / (gamma0 lambda_z^2).
  rec.lambda_z = real_root(1.0 / (2.0 * rec.alpha0 * rec.gamma0), 5);
  rec.lambda_x = -1.0 / (rec.gamma0 * rec.lambda_z * rec.lambda_z);

  LimitField original = fold_limit_field(sys);
  LimitField standard = [](double zeta, double w, double p) -> State {
    return {p, 6.0 * w * w + zeta};
  };
  rec.verify_deviation =
      dual_check(original, standard, rec.lambda_x, rec.lambda_z, {0.1, 0.0},
                 0.4);
  return rec;
}

PiiScalingRecord to_standard_form(const CuspLimitSystem& sys,
                                  XdotConstant which) {
  const double r = which == XdotConstant::rho ? sys.rho : sys.sigma;
  PiiScalingRecord rec;
  if (std::abs(r) < 1e-12 || std::abs(sys.beta) < 1e-12 ||
      std::abs(sys.alpha) < 1e-12)
    fail(ErrorCode::degenerate_coefficients,
         "standard-form map undefined: vanishing cusp coefficient");
  // lambda_z^3 = -1/(r beta); lambda_x^2 = -2/(r alpha lambda_z^2).
  rec.lambda_z = real_root(-1.0 / (r * sys.beta), 3);
  double lx2 = -2.0 / (r * sys.alpha * rec.lambda_z * rec.lambda_z);
  rec.real_scalings = lx2 > 0;
  rec.lambda_x = std::sqrt(std::abs(lx2));
  rec.a_param =
      -r * sys.a_offset * rec.lambda_z * rec.lambda_z / rec.lambda_x;

  if (rec.real_scalings) {
    LimitField original = cusp_limit_field(sys, which);
    const double a = rec.a_param;
    LimitField standard = [a](double zeta, double w, double p) -> State {
      return {p, 2.0 * w * w * w + zeta * w + a};
    };
    rec.verify_deviation =
        dual_check(original, standard, rec.lambda_x, rec.lambda_z, {0.1, 0.0},
                   0.4);
  }
  return rec;
}

}  // namespace slowfast
