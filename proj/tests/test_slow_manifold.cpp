#include <cmath>

#include "doctest.h"
#include "slowfast/slow_manifold.hpp"

using namespace slowfast;

TEST_SUITE("slow-manifold") {

TEST_CASE("critical points of the fold family fast system") {
  Model fold = Model::builtin("fold-canonical");
  // H_x = u + 3x^2, H_y = y: at u = -3 the branches are x = +-1, y = 0.
  auto plus = solve_critical_point(fold, -3.0, 0.4, {0.9, 0.1});
  CHECK(plus[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(plus[1]) < 1e-12);
  auto minus = solve_critical_point(fold, -3.0, 0.4, {-0.9, -0.1});
  CHECK(minus[0] == doctest::Approx(-1.0).epsilon(1e-12));
  // an exact guess converges without touching the Jacobian
  auto exact = solve_critical_point(fold, 0.0, 0.0, {0.0, 0.0});
  CHECK(exact[0] == 0.0);
  // but the degenerate point u = 0 has a singular fast Hessian
  CHECK_THROWS_AS(solve_critical_point(fold, 0.0, 0.0, {0.0, 0.1}), Error);
}

TEST_CASE("fold family chart matches the closed-form graph") {
  Model fold = Model::builtin("fold-canonical");
  // SM solves to y = 0, u = -3x^2 for every v.
  SmChart ch = sm_chart(fold, 0.7, 0.3, 0.0, -1.4);
  CHECK(std::abs(ch.f) < 1e-12);
  CHECK(ch.g == doctest::Approx(-3 * 0.49).epsilon(1e-12));
  CHECK(std::abs(ch.f_x) < 1e-12);
  CHECK(std::abs(ch.f_v) < 1e-12);
  CHECK(ch.g_x == doctest::Approx(-6 * 0.7).epsilon(1e-10));
  CHECK(ch.g_xx == doctest::Approx(-6.0).epsilon(1e-9));
  CHECK(std::abs(ch.g_xxx) < 1e-7);
  CHECK(std::abs(ch.g_xv) < 1e-10);
  CHECK(std::abs(ch.g_v) < 1e-10);
  CHECK(ch.conditioning == doctest::Approx(1.0).epsilon(1e-12));
  PhasePoint p = ch.point();
  CHECK(p.x == 0.7);
  CHECK(p.v == 0.3);
  CHECK(p.u == doctest::Approx(-1.47).epsilon(1e-12));
}

TEST_CASE("cusp family chart derivatives") {
  Model cusp = Model::builtin("cusp-canonical");
  // H_x = u + v x + x^3, so u = g(x, v) = -v x - x^3.
  const double x = 0.5, v = 0.3;
  SmChart ch = sm_chart(cusp, x, v, 0.0, 0.0);
  CHECK(ch.g == doctest::Approx(-v * x - x * x * x).epsilon(1e-12));
  CHECK(ch.g_x == doctest::Approx(-v - 3 * x * x).epsilon(1e-10));
  CHECK(ch.g_xx == doctest::Approx(-6 * x).epsilon(1e-9));
  CHECK(ch.g_xxx == doctest::Approx(-6.0).epsilon(1e-7));
  CHECK(ch.g_xv == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(ch.g_v == doctest::Approx(-x).epsilon(1e-10));
  // jet coefficients carry the same expansion
  CHECK(ch.g_jet.partial(Multi{2, 0, 0, 0}) == doctest::Approx(-6 * x).epsilon(1e-9));
}

TEST_CASE("swapped chart roles describe the same manifold") {
  // 0.7 x v couples the slow variables, so both (y,u) and (y,v) solve.
  Model m = Model::parse("v + u*x + x^3 + y^2/2 + 0.7*x*v");
  const double x = 0.4, u = -0.2;
  // H_x = u + 3x^2 + 0.7 v = 0 -> v = -(u + 3x^2)/0.7
  SmChart sw = chart_with_roles(m, 0, 2, x, u, 0.0, 0.0);
  double v_want = -(u + 3 * x * x) / 0.7;
  CHECK(sw.g == doctest::Approx(v_want).epsilon(1e-10));
  CHECK(sw.g_x == doctest::Approx(-6 * x / 0.7).epsilon(1e-8));
  CHECK(sw.g_xx == doctest::Approx(-6 / 0.7).epsilon(1e-7));
  // g is linear in the slow free coordinate u, so the mixed term vanishes
  // while the plain slow derivative carries the coupling.
  CHECK(std::abs(sw.g_xv) < 1e-8);
  CHECK(sw.g_v == doctest::Approx(-1 / 0.7).epsilon(1e-8));
  // the standard chart at the matching free values lands on the same point
  SmChart st = sm_chart(m, x, sw.g, 0.0, 0.0);
  CHECK(st.g == doctest::Approx(u).epsilon(1e-10));
  CHECK_THROWS_AS(chart_with_roles(m, 2, 3, x, u, 0, 0), Error);
}

TEST_CASE("chart solve fails cleanly when the fast block degenerates") {
  Model bad = Model::parse("x*v + y*u");
  CHECK_THROWS_AS(sm_chart(bad, 0.0, 0.0, 0.0, 0.0), Error);
  try {
    sm_chart(bad, 0.0, 0.0, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::chart_invalid);
  }
}

TEST_CASE("discriminant and its gradient in closed form") {
  Model fold = Model::builtin("fold-canonical");
  // Delta = H_xy^2 - H_yy H_xx = -6x
  CHECK(delta(fold, {0.5, 0.0, -0.75, 0.0}) == doctest::Approx(-3.0).epsilon(1e-12));
  auto g = delta_gradient(fold, {0.5, 0.0, -0.75, 0.0});
  CHECK(g[0] == doctest::Approx(-6.0).epsilon(1e-9));
  for (int k = 1; k < 4; ++k) CHECK(std::abs(g[k]) < 1e-9);

  Model cusp = Model::builtin("cusp-canonical");
  // Delta = -(v + 3 x^2)
  CHECK(delta(cusp, {0.2, 0.0, 0, 0.5}) ==
        doctest::Approx(-(0.5 + 0.12)).epsilon(1e-12));
  auto gc = delta_gradient(cusp, {0.2, 0.0, 0, 0.5});
  CHECK(gc[0] == doctest::Approx(-1.2).epsilon(1e-9));
  CHECK(gc[3] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("singular curve of the fold family is the v-axis") {
  Model fold = Model::builtin("fold-canonical");
  auto pts = trace_singular_curve(fold, {0, 0, 0, 0}, 25, 0.1);
  REQUIRE(pts.size() >= 26);
  for (const auto& p : pts) {
    CHECK(std::abs(p.x) < 1e-8);
    CHECK(std::abs(p.y) < 1e-8);
    CHECK(std::abs(p.u) < 1e-8);
  }
  // the curve actually moves along v
  CHECK(std::abs(pts.back().v - pts.front().v) > 2.0);
}

TEST_CASE("singular curve of the cusp family matches its closed form") {
  Model cusp = Model::builtin("cusp-canonical");
  // parametrized by x: y = 0, v = -3x^2, u = 2x^3
  auto pts = trace_singular_curve(cusp, {0, 0, 0, 0}, 40, 0.05);
  REQUIRE(pts.size() >= 41);
  double reach = 0;
  for (const auto& p : pts) {
    CHECK(std::abs(p.y) < 1e-8);
    CHECK(p.v == doctest::Approx(-3 * p.x * p.x).epsilon(1e-7));
    CHECK(p.u == doctest::Approx(2 * p.x * p.x * p.x).epsilon(1e-7));
    reach = std::max(reach, std::abs(p.x));
  }
  CHECK(reach > 0.5);
}

TEST_CASE("seed correction lands on the curve; bad arguments are rejected") {
  Model fold = Model::builtin("fold-canonical");
  // x = 1, u = -3 lies on SM with Delta = -6; the corrector pulls the seed
  // back to the singular curve (the v-axis) before stepping.
  auto pts = trace_singular_curve(fold, {1.0, 0.0, -3.0, 0.0}, 3, 0.1);
  CHECK(std::abs(pts.front().x) < 1e-8);
  CHECK(std::abs(pts.front().u) < 1e-8);
  CHECK_THROWS_AS(trace_singular_curve(fold, {0, 0, 0, 0}, 0, 0.1), Error);
  CHECK_THROWS_AS(trace_singular_curve(fold, {0, 0, 0, 0}, 5, -1.0), Error);
}

TEST_CASE("classification: fold family origin is a fold") {
  Model fold = Model::builtin("fold-canonical");
  SingularPointRecord rec = classify_singular_point(fold, {0, 0, 0, 0});
  CHECK(rec.classification == Classification::fold);
  CHECK(rec.reason == DegenerateReason::none);
  CHECK(rec.chart_valid);
  CHECK(std::abs(rec.delta_value) < 1e-12);
  CHECK(rec.margins.at("transversality") == doctest::Approx(1.0).epsilon(1e-10));
  // both fold criteria carry nonzero margins
  CHECK(std::abs(rec.margins.at("g_xx")) > rec.margins.at("tol_criterion"));
  CHECK(std::abs(rec.margins.at("delta_x")) > rec.margins.at("tol_delta_x"));
  CHECK(classification_name(rec.classification) == std::string("fold"));
}

TEST_CASE("classification: cusp family origin is a cusp") {
  Model cusp = Model::builtin("cusp-canonical");
  SingularPointRecord rec = classify_singular_point(cusp, {0, 0, 0, 0});
  CHECK(rec.classification == Classification::cusp);
  CHECK(rec.reason == DegenerateReason::none);
  CHECK(std::abs(rec.margins.at("g_x")) < rec.margins.at("tol_criterion"));
  CHECK(std::abs(rec.margins.at("g_xx")) < rec.margins.at("tol_criterion"));
  CHECK(std::abs(rec.margins.at("g_xxx")) > rec.margins.at("tol_criterion"));
  CHECK(std::abs(rec.margins.at("g_xv")) > rec.margins.at("tol_criterion"));
}

TEST_CASE("classification: quintic degeneracy is flagged") {
  Model quintic = Model::parse("v + u*x + x^5 + y^2/2");
  SingularPointRecord rec = classify_singular_point(quintic, {0, 0, 0, 0});
  CHECK(rec.classification == Classification::degenerate);
  CHECK(rec.reason == DegenerateReason::unclassified);
  CHECK(degenerate_reason_name(rec.reason) == std::string("unclassified"));
}

TEST_CASE("classification: regular, rank-deficient, and fast-block cases") {
  Model fold = Model::builtin("fold-canonical");
  SingularPointRecord reg = classify_singular_point(fold, {1.0, 0.0, -3.0, 0.0});
  CHECK(reg.classification == Classification::regular);

  Model rank1 = Model::parse("x^3 + y^2/2");
  SingularPointRecord rd = classify_singular_point(rank1, {0, 0, 0, 0});
  CHECK(rd.classification == Classification::degenerate);
  CHECK(rd.reason == DegenerateReason::rank_deficient);

  Model fastless = Model::parse("x*v + y*u");
  SingularPointRecord fb = classify_singular_point(fastless, {0, 0, 0, 0});
  CHECK(fb.classification == Classification::degenerate);
  CHECK(fb.reason == DegenerateReason::fast_block_only);

  CHECK_THROWS_AS(classify_singular_point(fold, {1.0, 0.5, -3.0, 0.0}), Error);
  try {
    classify_singular_point(fold, {1.0, 0.5, -3.0, 0.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_on_slow_manifold);
  }
}

TEST_CASE("classification: missing slow unfolding downgrades the cusp") {
  // H_x = u + x^3 has cusp-order contact but no v in the graph: g_xv = 0.
  Model m = Model::parse("u + u*x + x^4/4 + y^2/2");
  SingularPointRecord rec = classify_singular_point(m, {0, 0, 0, 0});
  CHECK(rec.classification == Classification::degenerate);
  CHECK(rec.reason == DegenerateReason::unclassified);
  CHECK(std::abs(rec.margins.at("g_xxx")) > rec.margins.at("tol_criterion"));
}

TEST_CASE("slow hamiltonian on a fold branch") {
  Model fold = Model::builtin("fold-canonical");
  // On the branch x = +sqrt(-u/3): h = v + u x + x^3; at u = -3, x = 1.
  SlowSample s = slow_hamiltonian(fold, -3.0, 0.7, {0.9, 0.0});
  CHECK(s.critical_point[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.h == doctest::Approx(0.7 - 2.0).epsilon(1e-12));
  CHECK(s.h_u == doctest::Approx(1.0).epsilon(1e-12));   // H_u = x
  CHECK(s.h_v == doctest::Approx(1.0).epsilon(1e-12));   // H_v = 1
  CHECK(s.slow_field[0] == doctest::Approx(1.0));
  CHECK(s.slow_field[1] == doctest::Approx(-1.0));
  // h is independent of v up to the explicit term: check at another v
  SlowSample s2 = slow_hamiltonian(fold, -3.0, -1.2, {0.9, 0.0});
  CHECK(s2.h == doctest::Approx(-1.2 - 2.0).epsilon(1e-12));
}

}  // TEST_SUITE
