#include "slowfast/verify.hpp"

#include <algorithm>
#include <cmath>

#include "slowfast/linalg.hpp"
#include "slowfast/slow_manifold.hpp"

namespace slowfast {

namespace {

constexpr double kSmResidTol = 1e-8;

}  // namespace

RescaleParams RescaleParams::from_epsilon(SingKind kind, double eps,
                                          const SingularTrace& trace) {
  if (!(eps > 0)) fail(ErrorCode::invalid_argument, "epsilon must be positive");
  RescaleParams p;
  p.kind = kind;
  p.epsilon = eps;
  p.r = kind == SingKind::fold ? std::pow(eps, 1.0 / 5.0)
                               : std::pow(eps, 1.0 / 3.0);
  p.trace = trace;
  return p;
}

FormDeterminantReport form_determinants(const Model& model,
                                        const PhasePoint& sm_point,
                                        double eps) {
  if (!(eps >= 0))
    fail(ErrorCode::invalid_argument, "epsilon must be non-negative");

  Jet h = model.full_jet(sm_point.array(), 2);
  auto grad = jet_gradient(h);
  if (std::max(std::abs(grad[0]), std::abs(grad[1])) > kSmResidTol)
    fail(ErrorCode::not_on_slow_manifold,
         "form determinants: point is off the slow manifold");
  auto hess = jet_hessian(h);

  // Graph derivatives of the fast pair over (u, v) from the implicit system
  // (H_x, H_y)(X(u, v), Y(u, v), u, v) = 0.
  linalg::Mat<2> fast{{{hess[0][0], hess[0][1]}, {hess[0][1], hess[1][1]}}};
  double fast_det = fast[0][0] * fast[1][1] - fast[0][1] * fast[1][0];
  if (std::abs(fast_det) < 1e-10)
    fail(ErrorCode::chart_invalid,
         "form determinants: fast Hessian is singular (point on the singular "
         "curve)");
  linalg::Vec<2> du, dv;
  if (!linalg::solve<2>(fast, {-hess[0][2], -hess[1][2]}, du) ||
      !linalg::solve<2>(fast, {-hess[0][3], -hess[1][3]}, dv))
    fail(ErrorCode::chart_invalid, "form determinants: fast solve failed");
  const double xu = du[0], yu = du[1], xv = dv[0], yv = dv[1];

  FormDeterminantReport rep;
  rep.epsilon = eps;
  rep.w = xu * yv - xv * yu;

  // det D at a given eps: Gram matrix of the lifted basis under the slow
  // two-form eps dx^dy + du^dv.
  auto det_d_at = [&](double e) {
    std::array<std::array<double, 4>, 2> lift{{{xu, yu, 1, 0}, {xv, yv, 0, 1}}};
    linalg::Mat<4> form{{{0, e, 0, 0}, {-e, 0, 0, 0}, {0, 0, 0, 1},
                         {0, 0, -1, 0}}};
    linalg::Mat<2> d{};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) s += lift[i][a] * form[a][b] * lift[j][b];
        d[i][j] = s;
      }
    }
    return linalg::det<2>(d);
  };

  // Recover the eps-polynomial det D = f0 + f1 eps + f2 eps^2 from three
  // nodes (fallback nodes when eps = 0, where the scaled set degenerates).
  const std::array<double, 3> nodes = eps > 0
                                          ? std::array<double, 3>{eps, 2 * eps,
                                                                  4 * eps}
                                          : std::array<double, 3>{0, 1e-3,
                                                                  2e-3};
  linalg::Mat<3> vand;
  linalg::Vec<3> vals;
  for (int i = 0; i < 3; ++i) {
    vand[i] = {1.0, nodes[i], nodes[i] * nodes[i]};
    vals[i] = det_d_at(nodes[i]);
  }
  linalg::Vec<3> coef;
  if (!linalg::solve<3>(vand, vals, coef))
    fail(ErrorCode::internal, "form determinants: Vandermonde solve failed");
  rep.f0 = coef[0];
  rep.f1 = coef[1];
  rep.f2 = coef[2];
  rep.det_d = det_d_at(eps);

  // Full-space form determinant in the chart basis: the symplectic blocks
  // are the canonical fast block scaled by eps and the canonical slow block.
  linalg::Mat<4> full{{{0, eps, 0, 0}, {-eps, 0, 0, 0}, {0, 0, 0, 1},
                       {0, 0, -1, 0}}};
  rep.det_c = linalg::det<4>(full);
  return rep;
}

LimitTrajectory blowup_rescale(const Trajectory& traj,
                               const RescaleParams& params) {
  if (traj.states.empty())
    fail(ErrorCode::invalid_argument, "cannot rescale an empty trajectory");
  if (std::abs(traj.epsilon - params.epsilon) >
      1e-12 * std::max(traj.epsilon, params.epsilon))
    fail(ErrorCode::mismatched_epsilon,
         "blow-up rescale: trajectory eps " + std::to_string(traj.epsilon) +
             " does not match params eps " + std::to_string(params.epsilon));

  const double r = params.r;
  const auto& tp = params.trace.point;
  LimitTrajectory out;
  out.z.reserve(traj.size());
  out.states.reserve(traj.size());

  if (params.kind == SingKind::cusp) {
    double r3 = r * r * r;
    out.level_offset = (traj.states.front().u - tp.u) / r3;
  }

  for (const auto& s : traj.states) {
    double z, x, y;
    if (params.kind == SingKind::fold) {
      x = (s.x - tp.x) / (r * r);
      y = (s.y - tp.y) / (r * r * r);
      z = (s.u - tp.u) / (r * r * r * r);
    } else {
      x = (s.x - tp.x) / r;
      y = (s.y - tp.y) / (r * r);
      z = (s.v - tp.v) / (r * r);
    }
    out.z.push_back(z);
    out.states.push_back({x, y});
  }
  if (out.z.size() > 1 && out.z.front() > out.z.back()) {
    std::reverse(out.z.begin(), out.z.end());
    std::reverse(out.states.begin(), out.states.end());
  }
  return out;
}

namespace {

struct PreparedTrace {
  SingularTrace trace;
  double slow_speed = 0;   // H_v (fold) or H_u (cusp) at the trace
  double time_sign = 1;    // sign of h that advances Z
};

}  // namespace

ConvergenceStudy convergence_study(const Model& model, double c,
                                   const std::vector<double>& epsilons,
                                   std::array<double, 2> z_window,
                                   std::array<double, 2> matched_init,
                                   const StudyOptions& options) {
  if (epsilons.empty())
    fail(ErrorCode::invalid_argument, "epsilon ladder must be non-empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0))
      fail(ErrorCode::invalid_argument, "epsilon values must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      fail(ErrorCode::invalid_argument, "epsilon ladder must be decreasing");
  }
  if (!(z_window[1] > z_window[0]))
    fail(ErrorCode::invalid_argument, "window must satisfy lo < hi");
  if (options.record_cap < 16)
    fail(ErrorCode::invalid_argument, "record_cap must be >= 16");

  ConvergenceStudy study;
  study.kind = options.kind;
  study.c = c;
  study.window = z_window;
  study.init = matched_init;

  // Trace + limit coefficients; a wrong singularity type at the trace is a
  // classification mismatch for the study.
  PreparedTrace prep;
  FoldLimitSystem fold_sys;
  CuspLimitSystem cusp_sys;
  try {
    if (options.kind == SingKind::fold) {
      fold_sys = fold_coefficients(model, c);
      prep.trace = fold_sys.trace;
      study.fold = fold_sys;
    } else {
      cusp_sys = cusp_coefficients(model, c);
      prep.trace = cusp_sys.trace;
      study.cusp = cusp_sys;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_a_fold || e.code() == ErrorCode::not_a_cusp)
      fail(ErrorCode::classification_mismatch, e.what());
    throw;
  }

  {
    Jet h1 = model.full_jet(prep.trace.point.array(), 1);
    auto grad = jet_gradient(h1);
    if (options.kind == SingKind::fold) {
      prep.slow_speed = grad[3];  // du/dt = eps H_v
      prep.time_sign = prep.slow_speed >= 0 ? 1.0 : -1.0;
    } else {
      prep.slow_speed = grad[2];  // dv/dt = -eps H_u
      prep.time_sign = prep.slow_speed >= 0 ? -1.0 : 1.0;
    }
    if (std::abs(prep.slow_speed) < 1e-10)
      fail(ErrorCode::transversality_failure,
           "convergence study: slow drift vanishes at the trace");
  }

  const auto& tp = prep.trace.point;
  for (double eps : epsilons) {
    auto params = RescaleParams::from_epsilon(options.kind, eps, prep.trace);
    const double r = params.r;

    // Matched start point: invert the blow-up at the window entry and close
    // with the level equation.
    PhasePoint p0;
    double a_offset = 0;
    if (options.kind == SingKind::fold) {
      p0.x = tp.x + r * r * matched_init[0];
      p0.y = tp.y + r * r * r * matched_init[1];
      p0.u = tp.u + r * r * r * r * z_window[0];
      ReducedSystem rs(model, c, Branch::solve_for_v);
      p0.v = rs.solve(p0.x, p0.y, p0.u, tp.v);
    } else {
      p0.x = tp.x + r * matched_init[0];
      p0.y = tp.y + r * r * matched_init[1];
      p0.v = tp.v + r * r * z_window[0];
      ReducedSystem rs(model, c, Branch::solve_for_u);
      p0.u = rs.solve(p0.x, p0.y, p0.v, tp.u);
      a_offset = (p0.u - tp.u) / (r * r * r) *
                 (options.kind == SingKind::cusp ? cusp_sys.sigma : 1.0);
    }

    const double h = prep.time_sign * eps / options.h_divisor;
    const double z_span = z_window[1] - z_window[0];
    const double expected_steps =
        z_span * std::pow(r, options.kind == SingKind::fold ? 4.0 : 2.0) /
        (eps * std::abs(h) * std::abs(prep.slow_speed));
    const long max_steps =
        static_cast<long>(4.0 * expected_steps) + 10000;
    const int stride =
        std::max(1, static_cast<int>(expected_steps / options.record_cap));

    auto z_of = [&](const PhasePoint& q) {
      return options.kind == SingKind::fold
                 ? (q.u - tp.u) / (r * r * r * r)
                 : (q.v - tp.v) / (r * r);
    };
    auto keep_going = [&](const PhasePoint& q) {
      return z_of(q) < z_window[1];
    };

    Trajectory traj =
        integrate_while(model, p0, eps, h, keep_going, max_steps, stride);
    if (traj.aborted)
      fail(ErrorCode::newton_divergence,
           "convergence study: full-system integration aborted: " +
               traj.abort_reason);
    if (z_of(traj.states.back()) < z_window[1])
      fail(ErrorCode::internal,
           "convergence study: window not traversed within the step budget");

    LimitTrajectory rescaled = blowup_rescale(traj, params);

    // Comparison points: the recorded sample Z values inside the window (a
    // strictly increasing prefix; the final record may overshoot hi).
    std::vector<double> zs;
    zs.reserve(rescaled.size());
    for (std::size_t i = 0; i < rescaled.size(); ++i) {
      double z = rescaled.z[i];
      if (z > z_window[1] + 1e-12 * (z_window[1] - z_window[0])) break;
      if (!zs.empty() && !(z > zs.back()))
        fail(ErrorCode::internal,
             "convergence study: slow drift reversed inside the window");
      zs.push_back(z);
    }
    if (zs.size() < 2)
      fail(ErrorCode::internal,
           "convergence study: too few samples inside the window");

    // Limit-system comparison (primary variant, plus the alternative beta
    // for cusps).  The limit integrator lands exactly on each zs entry, so
    // the deviation involves no interpolation.
    auto run_limit = [&](const LimitField& field) {
      auto lim = integrate_limit_field(field, matched_init, zs.front(),
                                       zs.back(), options.limit_tol, &zs,
                                       options.kind == SingKind::fold ? 2 : 1);
      if (lim.size() != zs.size())
        fail(ErrorCode::pole_in_window,
             "convergence study: limit solution leaves the window (pole near "
             "Z = " +
                 std::to_string(lim.pole ? lim.pole->z_est
                                         : zs[lim.size() ? lim.size() - 1
                                                         : 0]) +
                 ")");
      double dev = 0;
      for (std::size_t i = 0; i < zs.size(); ++i)
        dev = std::max(dev,
                       std::abs(rescaled.states[i][0] - lim.states[i][0]));
      return dev;
    };

    StudyRow row;
    row.epsilon = eps;
    row.r = r;
    row.a_offset = a_offset;
    if (options.kind == SingKind::fold) {
      row.sup_dev = run_limit(fold_limit_field(fold_sys));
    } else {
      CuspLimitSystem primary = cusp_sys;
      primary.a_offset = a_offset;
      CuspLimitSystem other = primary;
      if (options.beta_variant == BetaVariant::literal) {
        primary.beta = cusp_sys.beta_literal;
        other.beta = cusp_sys.beta;
      } else {
        other.beta = cusp_sys.beta_literal;
      }
      row.sup_dev =
          run_limit(cusp_limit_field(primary, options.xdot_constant));
      StudyRow other_row = row;
      other_row.sup_dev =
          run_limit(cusp_limit_field(other, options.xdot_constant));
      study.other_variant_rows.push_back(other_row);
    }
    study.rows.push_back(row);
  }

  auto fit_orders = [](std::vector<StudyRow>& rows) {
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == 0) {
        rows[i].q_fit = std::nan("");
        continue;
      }
      decreasing = decreasing && rows[i].sup_dev < rows[i - 1].sup_dev;
      double dr = std::log(rows[i - 1].r / rows[i].r);
      rows[i].q_fit = dr != 0.0
                          ? std::log(rows[i - 1].sup_dev / rows[i].sup_dev) / dr
                          : std::nan("");
    }
    return decreasing && rows.size() > 1;
  };
  study.decreasing = fit_orders(study.rows);
  if (!study.other_variant_rows.empty())
    study.other_variant_decreasing = fit_orders(study.other_variant_rows);
  return study;
}

}  // namespace slowfast
