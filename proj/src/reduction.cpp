#include "slowfast/reduction.hpp"

#include <cmath>
#include <random>

#include "slowfast/linalg.hpp"

namespace slowfast {

namespace {

constexpr double kPivotFloor = 1e-10;
constexpr double kValidityTol = 1e-7;
constexpr int kNewtonMaxIter = 60;

double derivative_scale4(const Model& model, const std::array<double, 4>& p) {
  Jet h = model.full_jet(p, 4);
  double s = 0.0;
  const JetLayout& lay = h.layout();
  for (int i = 0; i < lay.size(); ++i) {
    if (multi_total(lay.exponents(i)) < 1) continue;
    s = std::max(s, std::abs(h.raw(i) * lay.exponent_factorial(i)));
  }
  return std::max(1.0, s);
}

}  // namespace

ReducedSystem::ReducedSystem(Model model, double c, Branch branch)
    : model_(std::move(model)), c_(c), branch_(branch) {}

int ReducedSystem::pivot_var() const {
  return branch_ == Branch::solve_for_v ? 3 : 2;
}

int ReducedSystem::time_var() const {
  return branch_ == Branch::solve_for_v ? 2 : 3;
}

std::array<double, 4> ReducedSystem::assemble(double x, double y, double t,
                                              double pivot) const {
  std::array<double, 4> p{x, y, 0, 0};
  p[time_var()] = t;
  p[pivot_var()] = pivot;
  return p;
}

double ReducedSystem::solve(double x, double y, double t,
                            double pivot_guess) const {
  const int pv = pivot_var();
  double w = pivot_guess;
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    auto p = assemble(x, y, t, w);
    std::array<bool, 4> active{};
    active[pv] = true;
    Jet h = model_.eval_jet(p, active, 1);
    double resid = h.value() - c_;
    Multi m{0, 0, 0, 0};
    m[0] = 1;  // single active variable occupies slot 0
    double hp = h.partial(m);
    if (std::abs(hp) <= kPivotFloor)
      fail(ErrorCode::branch_invalid,
           std::string("isoenergetic branch invalid: |H_") +
               (pv == 3 ? "v" : "u") + "| <= 1e-10 at the queried point");
    if (std::abs(resid) < 1e-13 * std::max(1.0, std::abs(c_)))
      return w;
    w -= resid / hp;
    if (!std::isfinite(w))
      fail(ErrorCode::newton_divergence,
           "level solve left the finite domain");
  }
  fail(ErrorCode::newton_divergence,
       "level solve did not converge (branch pivot too flat?)");
}

Jet ReducedSystem::jet(double x, double y, double t, double pivot_guess,
                       int degree) const {
  const int pv = pivot_var();
  const int tv = time_var();
  const double w0 = solve(x, y, t, pivot_guess);
  const auto base = assemble(x, y, t, w0);

  const Jet h_poly = model_.full_jet(base, degree);
  const Jet hp_poly = h_poly.deriv(pv);

  // Unknown pivot displacement as a jet in (dx, dy, dt).
  Jet wd = Jet::constant(3, degree, 0.0);
  const Jet dx = Jet::variable(0, 0.0, 3, degree);
  const Jet dy = Jet::variable(1, 0.0, 3, degree);
  const Jet dt = Jet::variable(2, 0.0, 3, degree);

  for (int iter = 0; iter < degree + 2; ++iter) {
    std::vector<Jet> args(4);
    args[0] = dx;
    args[1] = dy;
    args[tv] = dt;
    args[pv] = wd;
    Jet resid = h_poly.compose(args) - c_;
    Jet hp = hp_poly.compose(args);
    wd -= resid / hp;
  }
  return wd + w0;
}

std::array<double, 2> ReducedSystem::field(double x, double y, double t,
                                           double pivot_guess) const {
  Jet s = jet(x, y, t, pivot_guess, 1);
  double s_x = s.partial({1, 0, 0, 0});
  double s_y = s.partial({0, 1, 0, 0});
  return {-s_y, s_x};
}

//----------------------------------------------------------------------------

SingularTrace singular_trace_on_level(const Model& model, double c,
                                      const PhasePoint& guess) {
  std::array<double, 4> z = guess.array();
  auto residual_norm = [&](const std::array<double, 4>& p, double* parab_out) {
    Jet h = model.full_jet(p, 2);
    auto grad = jet_gradient(h);
    auto hess = jet_hessian(h);
    double dlt = hess[0][1] * hess[0][1] - hess[1][1] * hess[0][0];
    if (parab_out) {
      *parab_out =
          hess[0][1] * (grad[2] * hess[1][3] - grad[3] * hess[1][2]) -
          hess[1][1] * (grad[2] * hess[0][3] - grad[3] * hess[0][2]);
    }
    return std::max({std::abs(grad[0]), std::abs(grad[1]), std::abs(dlt),
                     std::abs(h.value() - c)});
  };

  bool converged = false;
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    Jet h = model.full_jet(z, 3);
    auto grad = jet_gradient(h);
    auto hess = jet_hessian(h);
    double dlt = hess[0][1] * hess[0][1] - hess[1][1] * hess[0][0];
    std::array<double, 4> F{grad[0], grad[1], dlt, h.value() - c};
    double rnorm =
        std::max({std::abs(F[0]), std::abs(F[1]), std::abs(F[2]), std::abs(F[3])});
    double tol = 1e-11 * derivative_scale4(model, z);
    if (rnorm < tol) {
      converged = true;
      break;
    }
    auto dgrad = delta_gradient(model, PhasePoint::from_array(z));
    linalg::Mat<4> jac;
    for (int k = 0; k < 4; ++k) {
      jac[0][k] = hess[0][k];
      jac[1][k] = hess[1][k];
      jac[2][k] = dgrad[k];
      jac[3][k] = grad[k];
    }
    linalg::Vec<4> step;
    if (!linalg::solve<4>(jac, {F[0], F[1], F[2], F[3]}, step)) {
      // Tangent crossing: the 4x4 system degenerates when the level surface
      // is tangent to the singular curve.  Accept the guess if it already
      // solves the system; otherwise the trace is not transversally cut.
      if (rnorm < tol) {
        converged = true;
        break;
      }
      fail(ErrorCode::transversality_failure,
           "singular trace: level system is rank-deficient away from a "
           "solution (residual " + std::to_string(rnorm) + ")");
    }
    for (int i = 0; i < 4; ++i) z[i] -= step[i];
    if (!(std::isfinite(z[0]) && std::isfinite(z[1]) && std::isfinite(z[2]) &&
          std::isfinite(z[3])))
      fail(ErrorCode::newton_divergence,
           "singular trace: iteration left the finite domain");
  }
  if (!converged) {
    double check = residual_norm(z, nullptr);
    if (check >= 1e-11 * derivative_scale4(model, z))
      fail(ErrorCode::newton_divergence,
           "singular trace: Newton did not converge on the level");
  }

  SingularTrace out;
  out.c = c;
  out.point = PhasePoint::from_array(z);
  residual_norm(z, &out.transversality);
  return out;
}

//----------------------------------------------------------------------------

FoldLimitSystem fold_coefficients(const Model& model, double c,
                                  const PhasePoint& guess) {
  SingularTrace trace = singular_trace_on_level(model, c, guess);
  auto rec = classify_singular_point(model, trace.point);
  if (rec.classification != Classification::fold)
    fail(ErrorCode::not_a_fold,
         std::string("fold coefficients: trace classifies as ") +
             classification_name(rec.classification));

  ReducedSystem rs(model, c, Branch::solve_for_v);
  const auto& tp = trace.point;
  Jet s = rs.jet(tp.x, tp.y, tp.u, tp.v, 4);

  FoldLimitSystem out;
  out.trace = trace;
  out.alpha_c = s.partial({1, 0, 1, 0});
  out.gamma_c = s.coeff({3, 0, 0, 0});
  out.s1 = s.coeff({0, 2, 0, 0});
  out.alpha_residual = std::abs(s.partial({1, 0, 0, 0}));
  out.beta_residual = std::abs(s.coeff({2, 0, 0, 0}));

  double scale = derivative_scale4(model, tp.array());
  double pivot = std::abs(model.full_jet(tp.array(), 1).partial({0, 0, 0, 1}));
  double tol = kValidityTol * scale / std::max(kPivotFloor, pivot);
  if (out.alpha_residual > tol || out.beta_residual > tol)
    fail(ErrorCode::not_a_fold,
         "fold coefficients: reduced expansion fails the fold validity check "
         "(dS/dx = " + std::to_string(out.alpha_residual) +
         ", dS^2/dx^2 / 2 = " + std::to_string(out.beta_residual) + ")");
  return out;
}

CuspLimitSystem cusp_coefficients(const Model& model, double c,
                                  const PhasePoint& guess) {
  SingularTrace trace = singular_trace_on_level(model, c, guess);
  auto rec = classify_singular_point(model, trace.point);

  bool cusp_like = rec.classification == Classification::cusp;
  if (!cusp_like && rec.classification == Classification::degenerate &&
      rec.chart_valid) {
    // Accept the non-generic cusp contact (g_x, g_xx ~ 0, g_xxx != 0 but
    // g_xv ~ 0): coefficients still exist; genericity is flagged below.
    double tol = rec.margins.at("tol_criterion");
    cusp_like = std::abs(rec.chart.g_x) < tol &&
                std::abs(rec.chart.g_xx) < tol &&
                std::abs(rec.chart.g_xxx) > tol;
  }
  if (!cusp_like)
    fail(ErrorCode::not_a_cusp,
         std::string("cusp coefficients: trace classifies as ") +
             classification_name(rec.classification));

  ReducedSystem rs(model, c, Branch::solve_for_u);
  const auto& tp = trace.point;
  Jet s = rs.jet(tp.x, tp.y, tp.v, tp.u, 4);

  Jet h = model.full_jet(tp.array(), 4);
  double h_u = h.partial({0, 0, 1, 0});
  if (std::abs(h_u) <= kPivotFloor)
    fail(ErrorCode::branch_invalid,
         "cusp coefficients: H_u vanishes at the trace");

  CuspLimitSystem out;
  out.trace = trace;
  out.sigma = 1.0 / h_u;
  out.rho = h.partial({0, 2, 0, 0}) * out.sigma;
  out.beta = -2.0 * s.coeff({2, 0, 1, 0});
  out.alpha = -4.0 * s.coeff({4, 0, 0, 0});
  out.beta_literal = h.partial({2, 0, 1, 1}) * out.sigma;
  // det d(H_x, H_xx)/d(u, v) at the trace.
  out.genericity_det = h.partial({1, 0, 1, 0}) * h.partial({2, 0, 0, 1}) -
                       h.partial({1, 0, 0, 1}) * h.partial({2, 0, 1, 0});
  double scale = derivative_scale4(model, tp.array());
  out.generic = std::abs(out.genericity_det) > kValidityTol * scale * scale;
  if (std::abs(out.alpha) <= kValidityTol * scale)
    fail(ErrorCode::degenerate_coefficients,
         "cusp coefficients: quartic coefficient vanishes at the trace");
  return out;
}

NormalShiftReport normal_shift_check(const Model& model,
                                     const PhasePoint& center,
                                     double half_width, int samples,
                                     std::uint64_t seed) {
  if (samples < 1) fail(ErrorCode::invalid_argument, "samples must be >= 1");
  if (!(half_width > 0))
    fail(ErrorCode::invalid_argument, "half_width must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-half_width, half_width);

  NormalShiftReport rep;
  rep.samples = samples;
  for (int k = 0; k < samples; ++k) {
    double x = center.x + box(rng);
    double u = center.u + box(rng);
    double v = center.v + box(rng);
    // Solve H_y(x, y, u, v) = 0 for y near the center's y.
    double y = center.y;
    bool ok = false;
    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
      Jet h = model.eval_jet({x, y, u, v}, {false, true, false, false}, 2);
      double hy = h.partial({1, 0, 0, 0});
      double hyy = h.partial({2, 0, 0, 0});
      if (std::abs(hy) < 1e-13) {
        ok = true;
        break;
      }
      if (std::abs(hyy) < 1e-12)
        fail(ErrorCode::singular_jacobian,
             "normal-shift check: H_yy vanishes at a sample");
      y -= hy / hyy;
      if (!std::isfinite(y))
        fail(ErrorCode::newton_divergence,
             "normal-shift check: iteration left the finite domain");
    }
    if (!ok)
      fail(ErrorCode::newton_divergence,
           "normal-shift check: graph solve did not converge");
    Jet h = model.eval_jet({x, y, u, v}, {false, true, false, false}, 1);
    rep.max_residual =
        std::max(rep.max_residual, std::abs(h.partial({1, 0, 0, 0})));
  }
  return rep;
}

}  // namespace slowfast
