#include "slowfast/slow_manifold.hpp"

#include <algorithm>
#include <cmath>

#include "slowfast/linalg.hpp"

namespace slowfast {

namespace {

constexpr double kBaseTol = 1e-7;     // relative zero threshold for criteria
constexpr double kSmResidTol = 1e-8;  // membership residual for SM
constexpr int kNewtonMaxIter = 50;

// Largest |partial derivative| of order 1..max_order from a full jet.
double derivative_scale(const Jet& h, int max_order) {
  double s = 0.0;
  const JetLayout& lay = h.layout();
  for (int i = 0; i < lay.size(); ++i) {
    int total = multi_total(lay.exponents(i));
    if (total < 1 || total > max_order) continue;
    s = std::max(s, std::abs(h.raw(i) * lay.exponent_factorial(i)));
  }
  return s;
}

double second_partial(const Jet& h, int i, int j) {
  Multi m{0, 0, 0, 0};
  m[i] = static_cast<std::uint8_t>(m[i] + 1);
  m[j] = static_cast<std::uint8_t>(m[j] + 1);
  return h.partial(m);
}

double third_partial(const Jet& h, int i, int j, int k) {
  Multi m{0, 0, 0, 0};
  m[i] = static_cast<std::uint8_t>(m[i] + 1);
  m[j] = static_cast<std::uint8_t>(m[j] + 1);
  m[k] = static_cast<std::uint8_t>(m[k] + 1);
  return h.partial(m);
}

}  // namespace

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::regular: return "regular";
    case Classification::fold: return "fold";
    case Classification::cusp: return "cusp";
    case Classification::degenerate: return "degenerate";
  }
  return "unknown";
}

const char* degenerate_reason_name(DegenerateReason r) {
  switch (r) {
    case DegenerateReason::none: return "none";
    case DegenerateReason::rank_deficient: return "rank_deficient";
    case DegenerateReason::fast_block_only: return "fast_block_only";
    case DegenerateReason::criteria_conflict: return "criteria_conflict";
    case DegenerateReason::chart_failure: return "chart_failure";
    case DegenerateReason::unclassified: return "unclassified";
  }
  return "unknown";
}

PhasePoint SmChart::point() const {
  std::array<double, 4> p{};
  p[fast_free] = x;
  p[1 - fast_free] = f;
  p[slow_free] = v;
  p[5 - slow_free] = g;
  return PhasePoint::from_array(p);
}

std::array<double, 2> solve_critical_point(const Model& model, double u,
                                           double v,
                                           std::array<double, 2> guess) {
  std::array<double, 4> p{guess[0], guess[1], u, v};
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    Jet h = model.eval_jet(p, {true, true, false, false}, 2);
    double hx = h.partial({1, 0, 0, 0});
    double hy = h.partial({0, 1, 0, 0});
    if (std::max(std::abs(hx), std::abs(hy)) < 1e-12)
      return {p[0], p[1]};
    linalg::Mat<2> jac{{{h.partial({2, 0, 0, 0}), h.partial({1, 1, 0, 0})},
                        {h.partial({1, 1, 0, 0}), h.partial({0, 2, 0, 0})}}};
    linalg::Vec<2> step;
    if (!linalg::solve<2>(jac, {hx, hy}, step))
      fail(ErrorCode::singular_jacobian,
           "critical point solve: fast Hessian is singular at (" +
               std::to_string(p[0]) + ", " + std::to_string(p[1]) + ")");
    p[0] -= step[0];
    p[1] -= step[1];
    if (!(std::isfinite(p[0]) && std::isfinite(p[1])))
      fail(ErrorCode::newton_divergence,
           "critical point solve: iteration left the finite domain");
  }
  fail(ErrorCode::newton_divergence,
       "critical point solve: no convergence from guess (" +
           std::to_string(guess[0]) + ", " + std::to_string(guess[1]) + ")");
}

SmChart chart_with_roles(const Model& model, int fast_free, int slow_free,
                         double a, double b, double fast_guess,
                         double slow_guess, int degree) {
  if (fast_free != 0 && fast_free != 1)
    fail(ErrorCode::invalid_argument, "fast_free must be 0 (x) or 1 (y)");
  if (slow_free != 2 && slow_free != 3)
    fail(ErrorCode::invalid_argument, "slow_free must be 2 (u) or 3 (v)");
  if (degree < 2)
    fail(ErrorCode::invalid_argument, "chart degree must be at least 2");
  const int fast_solved = 1 - fast_free;
  const int slow_solved = 5 - slow_free;

  // Scalar Newton for the solved pair at the chart's base point.
  std::array<double, 4> p{};
  p[fast_free] = a;
  p[slow_free] = b;
  p[fast_solved] = fast_guess;
  p[slow_solved] = slow_guess;
  double minor = 0;
  for (int iter = 0;; ++iter) {
    Jet h = model.full_jet(p, 2);
    auto grad = jet_gradient(h);
    double hx = grad[0], hy = grad[1];
    linalg::Mat<2> jac{
        {{second_partial(h, 0, fast_solved), second_partial(h, 0, slow_solved)},
         {second_partial(h, 1, fast_solved), second_partial(h, 1, slow_solved)}}};
    minor = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    if (std::max(std::abs(hx), std::abs(hy)) < 1e-12) break;
    if (iter >= kNewtonMaxIter)
      fail(ErrorCode::newton_divergence,
           "chart solve: no convergence for the solved pair");
    linalg::Vec<2> step;
    if (!linalg::solve<2>(jac, {hx, hy}, step))
      fail(ErrorCode::chart_invalid,
           "chart solve: pivot minor is singular for this role choice");
    p[fast_solved] -= step[0];
    p[slow_solved] -= step[1];
    if (!(std::isfinite(p[fast_solved]) && std::isfinite(p[slow_solved])))
      fail(ErrorCode::newton_divergence,
           "chart solve: iteration left the finite domain");
  }
  {
    Jet h2 = model.full_jet(p, 2);
    double s2 = std::max(1.0, derivative_scale(h2, 2));
    if (std::abs(minor) < kBaseTol * s2 * s2)
      fail(ErrorCode::chart_invalid,
           "chart solve: pivot minor " + std::to_string(minor) +
               " too small; choose different roles");
  }

  // Jet-Newton for the solved pair as expansions in the free displacements.
  const int jet_degree = degree - 1;
  const Jet h_poly = model.full_jet(p, degree);
  const Jet hx_poly = h_poly.deriv(0);
  const Jet hy_poly = h_poly.deriv(1);
  const Jet hx_f = hx_poly.deriv(fast_solved);
  const Jet hx_s = hx_poly.deriv(slow_solved);
  const Jet hy_f = hy_poly.deriv(fast_solved);
  const Jet hy_s = hy_poly.deriv(slow_solved);

  Jet fd = Jet::constant(2, jet_degree, 0.0);  // solved fast displacement
  Jet gd = Jet::constant(2, jet_degree, 0.0);  // solved slow displacement
  const Jet da = Jet::variable(0, 0.0, 2, jet_degree);
  const Jet db = Jet::variable(1, 0.0, 2, jet_degree);

  auto make_args = [&](const Jet& fdisp, const Jet& gdisp) {
    std::vector<Jet> args(4);
    args[fast_free] = da;
    args[slow_free] = db;
    args[fast_solved] = fdisp;
    args[slow_solved] = gdisp;
    return args;
  };

  for (int iter = 0; iter < jet_degree + 2; ++iter) {
    auto args = make_args(fd, gd);
    Jet r1 = hx_poly.compose(args);
    Jet r2 = hy_poly.compose(args);
    Jet j11 = hx_f.compose(args);
    Jet j12 = hx_s.compose(args);
    Jet j21 = hy_f.compose(args);
    Jet j22 = hy_s.compose(args);
    Jet det = j11 * j22 - j12 * j21;
    Jet inv_det = det.reciprocal();
    fd -= (j22 * r1 - j12 * r2) * inv_det;
    gd -= (j11 * r2 - j21 * r1) * inv_det;
  }

  SmChart chart;
  chart.fast_free = fast_free;
  chart.slow_free = slow_free;
  chart.x = a;
  chart.v = b;
  chart.f = p[fast_solved] + fd.value();
  chart.g = p[slow_solved] + gd.value();
  chart.f_x = fd.partial({1, 0, 0, 0});
  chart.f_v = fd.partial({0, 1, 0, 0});
  chart.g_x = gd.partial({1, 0, 0, 0});
  chart.g_v = gd.partial({0, 1, 0, 0});
  chart.g_xx = jet_degree >= 2 ? gd.partial({2, 0, 0, 0}) : 0.0;
  chart.g_xv = jet_degree >= 2 ? gd.partial({1, 1, 0, 0}) : 0.0;
  chart.g_xxx = jet_degree >= 3 ? gd.partial({3, 0, 0, 0}) : 0.0;
  chart.conditioning = std::abs(minor);
  chart.f_jet = fd + p[fast_solved];
  chart.g_jet = gd + p[slow_solved];
  return chart;
}

SmChart sm_chart(const Model& model, double x, double v, double y_guess,
                 double u_guess, int degree) {
  return chart_with_roles(model, 0, 3, x, v, y_guess, u_guess, degree);
}

double delta(const Model& model, const PhasePoint& p) {
  Jet h = model.eval_jet(p.array(), {true, true, false, false}, 2);
  double hxx = h.partial({2, 0, 0, 0});
  double hxy = h.partial({1, 1, 0, 0});
  double hyy = h.partial({0, 2, 0, 0});
  return hxy * hxy - hyy * hxx;
}

std::array<double, 4> delta_gradient(const Model& model, const PhasePoint& p) {
  Jet h = model.full_jet(p.array(), 3);
  double hxx = second_partial(h, 0, 0);
  double hxy = second_partial(h, 0, 1);
  double hyy = second_partial(h, 1, 1);
  std::array<double, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k] = 2.0 * hxy * third_partial(h, 0, 1, k) -
             third_partial(h, 1, 1, k) * hxx - hyy * third_partial(h, 0, 0, k);
  }
  return out;
}

namespace {

// Residual and Jacobian of the singular-curve system (H_x, H_y, Delta).
void singular_system(const Model& model, const std::array<double, 4>& p,
                     std::array<double, 3>& value,
                     std::array<std::array<double, 4>, 3>& jac) {
  Jet h = model.full_jet(p, 3);
  auto grad = jet_gradient(h);
  double hxx = second_partial(h, 0, 0);
  double hxy = second_partial(h, 0, 1);
  double hyy = second_partial(h, 1, 1);
  value = {grad[0], grad[1], hxy * hxy - hyy * hxx};
  for (int k = 0; k < 4; ++k) {
    jac[0][k] = second_partial(h, 0, k);
    jac[1][k] = second_partial(h, 1, k);
    jac[2][k] = 2.0 * hxy * third_partial(h, 0, 1, k) -
                third_partial(h, 1, 1, k) * hxx -
                hyy * third_partial(h, 0, 0, k);
  }
}

double scaled_residual_tol(const Model& model, const std::array<double, 4>& p) {
  Jet h = model.full_jet(p, 2);
  return 1e-11 * std::max(1.0, derivative_scale(h, 2));
}

}  // namespace

std::vector<PhasePoint> trace_singular_curve(const Model& model,
                                             const PhasePoint& seed, int steps,
                                             double ds) {
  if (steps < 1) fail(ErrorCode::invalid_argument, "steps must be >= 1");
  if (!(ds > 0)) fail(ErrorCode::invalid_argument, "ds must be positive");

  std::array<double, 3> F;
  std::array<std::array<double, 4>, 3> DF;

  // Corrector: Newton on (F, tangent . (z - anchor)) = (0, 0).
  auto correct = [&](std::array<double, 4>& z, const std::array<double, 4>& tan,
                     const std::array<double, 4>& anchor) {
    for (int iter = 0; iter < 20; ++iter) {
      singular_system(model, z, F, DF);
      double plane = tan[0] * (z[0] - anchor[0]) + tan[1] * (z[1] - anchor[1]) +
                     tan[2] * (z[2] - anchor[2]) + tan[3] * (z[3] - anchor[3]);
      double rnorm = std::max({std::abs(F[0]), std::abs(F[1]), std::abs(F[2]),
                               std::abs(plane)});
      if (rnorm < scaled_residual_tol(model, z)) return true;
      linalg::Mat<4> jac;
      for (int c = 0; c < 4; ++c) {
        jac[0][c] = DF[0][c];
        jac[1][c] = DF[1][c];
        jac[2][c] = DF[2][c];
        jac[3][c] = tan[c];
      }
      linalg::Vec<4> step;
      if (!linalg::solve<4>(jac, {F[0], F[1], F[2], plane}, step)) return false;
      for (int i = 0; i < 4; ++i) z[i] -= step[i];
      if (!(std::isfinite(z[0]) && std::isfinite(z[1]) && std::isfinite(z[2]) &&
            std::isfinite(z[3])))
        return false;
    }
    return false;
  };

  std::vector<PhasePoint> curve;
  std::array<double, 4> z = seed.array();
  std::array<double, 4> tangent{};

  // Correct the seed onto the curve along its normal space: use the tangent
  // at the seed as the frozen direction.
  singular_system(model, z, F, DF);
  if (!linalg::nullspace_3x4(DF, tangent))
    fail(ErrorCode::singular_jacobian,
         "singular-curve continuation: rank-deficient system at the seed");
  {
    // Deterministic orientation: largest-magnitude component positive.
    int imax = 0;
    for (int i = 1; i < 4; ++i)
      if (std::abs(tangent[i]) > std::abs(tangent[imax])) imax = i;
    if (tangent[imax] < 0)
      for (auto& t : tangent) t = -t;
  }
  if (!correct(z, tangent, z))
    fail(ErrorCode::newton_divergence,
         "singular-curve continuation: seed does not converge onto the curve");
  curve.push_back(PhasePoint::from_array(z));

  for (int k = 0; k < steps; ++k) {
    singular_system(model, z, F, DF);
    std::array<double, 4> fresh;
    if (!linalg::nullspace_3x4(DF, fresh))
      fail(ErrorCode::continuation_stall,
           "singular-curve continuation: rank drop along the curve");
    double dot = fresh[0] * tangent[0] + fresh[1] * tangent[1] +
                 fresh[2] * tangent[2] + fresh[3] * tangent[3];
    if (dot < 0)
      for (auto& t : fresh) t = -t;
    tangent = fresh;

    double step_len = ds;
    bool advanced = false;
    for (int attempt = 0; attempt <= 3; ++attempt) {
      std::array<double, 4> pred;
      for (int i = 0; i < 4; ++i) pred[i] = z[i] + step_len * tangent[i];
      std::array<double, 4> cand = pred;
      if (correct(cand, tangent, pred)) {
        z = cand;
        advanced = true;
        break;
      }
      step_len *= 0.5;
    }
    if (!advanced)
      fail(ErrorCode::continuation_stall,
           "singular-curve continuation stalled after 3 step halvings at (" +
               std::to_string(z[0]) + ", " + std::to_string(z[1]) + ", " +
               std::to_string(z[2]) + ", " + std::to_string(z[3]) + ")");
    curve.push_back(PhasePoint::from_array(z));
  }
  return curve;
}

SingularPointRecord classify_singular_point(const Model& model,
                                            const PhasePoint& p) {
  SingularPointRecord rec;
  rec.location = p;
  rec.zero_tolerance = kBaseTol;

  const Jet h = model.full_jet(p.array(), 4);
  const auto grad = jet_gradient(h);
  const double scale1 = std::max(1.0, derivative_scale(h, 1));
  if (std::max(std::abs(grad[0]), std::abs(grad[1])) > kSmResidTol * scale1)
    fail(ErrorCode::not_on_slow_manifold,
         "classification point is off the slow manifold: |H_x|, |H_y| = (" +
             std::to_string(std::abs(grad[0])) + ", " +
             std::to_string(std::abs(grad[1])) + ")");

  // Rows of the second-derivative matrix of (H_y, H_x) over (x, y, u, v).
  std::array<double, 4> row_hy, row_hx;
  for (int k = 0; k < 4; ++k) {
    row_hy[k] = second_partial(h, 1, k);
    row_hx[k] = second_partial(h, 0, k);
  }
  auto minor = [&](int i, int j) {
    return row_hy[i] * row_hx[j] - row_hy[j] * row_hx[i];
  };
  const double delta_val = minor(0, 1);  // = H_xy^2 - H_yy H_xx
  const double minor_uv = minor(2, 3);
  // Chart minors: solve pairs (y,u), (y,v), (x,u), (x,v).
  struct ChartOption {
    int fast_free, slow_free;
    double value;
  };
  std::array<ChartOption, 4> charts{{{0, 3, minor(1, 2)},
                                     {0, 2, minor(1, 3)},
                                     {1, 3, minor(0, 2)},
                                     {1, 2, minor(0, 3)}}};
  double best_chart = 0, max_minor = 0;
  int best_idx = 0;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(charts[i].value) > std::abs(best_chart)) {
      best_chart = charts[i].value;
      best_idx = i;
    }
  }
  max_minor = std::max({std::abs(delta_val), std::abs(minor_uv),
                        std::abs(charts[0].value), std::abs(charts[1].value),
                        std::abs(charts[2].value), std::abs(charts[3].value)});

  const double scale2 = std::max(1.0, derivative_scale(h, 2));
  const double scale4 = std::max(1.0, derivative_scale(h, 4));
  const double tol_minor = kBaseTol * scale2 * scale2;
  const double tol_first = kBaseTol * scale4;
  const double tol_dx = kBaseTol * scale4 * scale4;

  rec.delta_value = delta_val;
  auto& m = rec.margins;
  m["delta"] = delta_val;
  m["rank_indicator"] = max_minor;
  m["minor_uv"] = minor_uv;
  m["chart_minor"] = best_chart;
  m["tol_minor"] = tol_minor;
  m["tol_criterion"] = tol_first;
  m["tol_delta_x"] = tol_dx;

  // Slow-regularity bracket (transversality of the singular curve data):
  // H_xy (H_u H_yv - H_v H_yu) - H_yy (H_u H_xv - H_v H_xu).
  const double parab =
      second_partial(h, 0, 1) * (grad[2] * second_partial(h, 1, 3) -
                                 grad[3] * second_partial(h, 1, 2)) -
      second_partial(h, 1, 1) * (grad[2] * second_partial(h, 0, 3) -
                                 grad[3] * second_partial(h, 0, 2));
  m["transversality"] = parab;

  if (max_minor < tol_minor) {
    rec.classification = Classification::degenerate;
    rec.reason = DegenerateReason::rank_deficient;
    return rec;
  }
  if (std::abs(best_chart) < tol_minor && std::abs(delta_val) < tol_minor) {
    rec.classification = Classification::degenerate;
    rec.reason = DegenerateReason::fast_block_only;
    return rec;
  }

  // Build the best-conditioned chart (needed for margins in every branch).
  bool have_chart = false;
  if (std::abs(best_chart) >= tol_minor) {
    const auto& opt = charts[best_idx];
    const auto pa = p.array();
    try {
      rec.chart = chart_with_roles(model, opt.fast_free, opt.slow_free,
                                   pa[opt.fast_free], pa[opt.slow_free],
                                   pa[1 - opt.fast_free], pa[5 - opt.slow_free]);
      have_chart = true;
    } catch (const Error&) {
      have_chart = false;
    }
  }
  rec.chart_valid = have_chart;
  if (have_chart) {
    m["g_x"] = rec.chart.g_x;
    m["g_xx"] = rec.chart.g_xx;
    m["g_xxx"] = rec.chart.g_xxx;
    m["g_xv"] = rec.chart.g_xv;
    m["conditioning"] = rec.chart.conditioning;

    // d Delta / d(chart fast direction) along SM.
    auto dgrad = delta_gradient(model, p);
    double dx = dgrad[rec.chart.fast_free] +
                dgrad[1 - rec.chart.fast_free] * rec.chart.f_x +
                dgrad[5 - rec.chart.slow_free] * rec.chart.g_x;
    m["delta_x"] = dx;
  }

  if (std::abs(delta_val) > tol_minor) {
    rec.classification = Classification::regular;
    rec.reason = DegenerateReason::none;
    return rec;
  }

  if (!have_chart) {
    rec.classification = Classification::degenerate;
    rec.reason = DegenerateReason::chart_failure;
    return rec;
  }

  const bool gx_zero = std::abs(rec.chart.g_x) < tol_first;
  const bool gxx_nonzero = std::abs(rec.chart.g_xx) > tol_first;
  const bool dx_nonzero = std::abs(m["delta_x"]) > tol_dx;
  const bool gxv_nonzero = std::abs(rec.chart.g_xv) > tol_first;
  const bool gxxx_nonzero = std::abs(rec.chart.g_xxx) > tol_first;

  if (!gx_zero) {
    // Inconsistent with |Delta| small (g_x = -Delta / chart minor).
    rec.classification = Classification::degenerate;
    rec.reason = DegenerateReason::criteria_conflict;
    return rec;
  }
  if (gxx_nonzero && dx_nonzero) {
    rec.classification = Classification::fold;
    rec.reason = DegenerateReason::none;
    return rec;
  }
  if (gxx_nonzero != dx_nonzero) {
    rec.classification = Classification::degenerate;
    rec.reason = DegenerateReason::criteria_conflict;
    return rec;
  }
  if (gxv_nonzero && gxxx_nonzero) {
    rec.classification = Classification::cusp;
    rec.reason = DegenerateReason::none;
    return rec;
  }
  rec.classification = Classification::degenerate;
  rec.reason = DegenerateReason::unclassified;
  return rec;
}

SlowSample slow_hamiltonian(const Model& model, double u, double v,
                            std::array<double, 2> branch_guess) {
  auto cp = solve_critical_point(model, u, v, branch_guess);
  std::array<double, 4> p{cp[0], cp[1], u, v};
  Jet h = model.full_jet(p, 1);
  auto grad = jet_gradient(h);
  SlowSample s;
  s.h = h.value();
  s.h_u = grad[2];
  s.h_v = grad[3];
  s.critical_point = cp;
  s.slow_field = {grad[3], -grad[2]};
  return s;
}

}  // namespace slowfast
