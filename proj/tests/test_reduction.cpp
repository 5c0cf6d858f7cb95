#include <cmath>
#include <random>

#include "doctest.h"
#include "slowfast/reduction.hpp"

using namespace slowfast;

TEST_SUITE("reduction") {

TEST_CASE("fold-branch solve matches the closed form") {
  // H_v = 1, so S = c - u x - x^3 - y^2/2 exactly.
  Model fold = Model::builtin("fold-canonical");
  std::mt19937_64 rng(20240803);
  std::uniform_real_distribution<double> coin(-0.8, 0.8);
  for (double c : {0.0, 0.5, -1.25}) {
    ReducedSystem red(fold, c, Branch::solve_for_v);
    CHECK(red.pivot_var() == 3);
    CHECK(red.time_var() == 2);
    for (int i = 0; i < 30; ++i) {
      double x = coin(rng), y = coin(rng), u = coin(rng);
      double want = c - u * x - x * x * x - y * y / 2;
      CHECK(red.solve(x, y, u, 0.0) == doctest::Approx(want).epsilon(1e-13));
      auto f = red.field(x, y, u, 0.0);
      CHECK(f[0] == doctest::Approx(y).epsilon(1e-11));             // -S_y
      CHECK(f[1] == doctest::Approx(-u - 3 * x * x).epsilon(1e-11)); // S_x
    }
  }
}

TEST_CASE("cusp-branch solve matches the closed form") {
  // H = u (1 + x) + v x^2/2 + x^4/4 + y^2/2 = c solves to
  // u = (c - v x^2/2 - x^4/4 - y^2/2) / (1 + x).
  Model cusp = Model::builtin("cusp-canonical");
  std::mt19937_64 rng(417);
  std::uniform_real_distribution<double> coin(-0.5, 0.5);
  ReducedSystem red(cusp, 0.2, Branch::solve_for_u);
  CHECK(red.pivot_var() == 2);
  CHECK(red.time_var() == 3);
  for (int i = 0; i < 30; ++i) {
    double x = coin(rng), y = coin(rng), v = coin(rng);
    double want = (0.2 - v * x * x / 2 - std::pow(x, 4) / 4 - y * y / 2) / (1 + x);
    CHECK(red.solve(x, y, v, 0.0) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("reduced field equals the pivot-rescaled restriction") {
  // (-S_y, S_x) = (H_y / H_pivot, -H_x / H_pivot) on the level set.
  std::mt19937_64 rng(20240804);
  std::uniform_real_distribution<double> coin(-0.4, 0.4);

  Model coupled = Model::parse("v + u*x + x^3 + y^2/2 + 0.3*x*v");
  ReducedSystem rv(coupled, 0.1, Branch::solve_for_v);
  for (int i = 0; i < 100; ++i) {
    double x = coin(rng), y = coin(rng), t = coin(rng);
    double v = rv.solve(x, y, t, 0.0);
    Jet h = coupled.full_jet({x, y, t, v}, 1);
    auto g = jet_gradient(h);
    CHECK(h.value() == doctest::Approx(0.1).epsilon(1e-12));  // on the level
    auto f = rv.field(x, y, t, 0.0);
    CHECK(f[0] == doctest::Approx(g[1] / g[3]).epsilon(1e-9));
    CHECK(f[1] == doctest::Approx(-g[0] / g[3]).epsilon(1e-9));
  }

  Model cusp = Model::builtin("cusp-canonical");
  ReducedSystem ru(cusp, -0.05, Branch::solve_for_u);
  for (int i = 0; i < 100; ++i) {
    double x = coin(rng), y = coin(rng), t = coin(rng);
    double u = ru.solve(x, y, t, 0.0);
    Jet h = cusp.full_jet({x, y, u, t}, 1);
    auto g = jet_gradient(h);
    CHECK(h.value() == doctest::Approx(-0.05).epsilon(1e-12));
    auto f = ru.field(x, y, t, 0.0);
    CHECK(f[0] == doctest::Approx(g[1] / g[2]).epsilon(1e-9));
    CHECK(f[1] == doctest::Approx(-g[0] / g[2]).epsilon(1e-9));
  }
}

TEST_CASE("taylor data of S at the origin") {
  Model fold = Model::builtin("fold-canonical");
  ReducedSystem red(fold, 0.0, Branch::solve_for_v);
  Jet s = red.jet(0, 0, 0, 0.0, 4);
  // S = -u x - x^3 - y^2/2 about the origin (variables dx, dy, du)
  CHECK(std::abs(s.value()) < 1e-13);
  CHECK(s.partial(Multi{1, 0, 1, 0}) == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(s.partial(Multi{3, 0, 0, 0}) == doctest::Approx(-6.0).epsilon(1e-10));
  CHECK(s.partial(Multi{0, 2, 0, 0}) == doctest::Approx(-1.0).epsilon(1e-11));
  CHECK(std::abs(s.partial(Multi{1, 0, 0, 0})) < 1e-11);
  CHECK(std::abs(s.partial(Multi{2, 0, 0, 0})) < 1e-10);
}

TEST_CASE("branch validity is enforced at the pivot") {
  Model cusp = Model::builtin("cusp-canonical");
  // H_v = x^2/2 vanishes at x = 0: the v-branch is invalid there.
  ReducedSystem bad(cusp, 0.0, Branch::solve_for_v);
  CHECK_THROWS_AS(bad.solve(0.0, 0.0, 0.0, 0.0), Error);
  try {
    bad.solve(0.0, 0.0, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::branch_invalid);
  }
  Model fold = Model::builtin("fold-canonical");
  // H_u = x vanishes at x = 0: the u-branch is invalid there.
  ReducedSystem badf(fold, 0.0, Branch::solve_for_u);
  CHECK_THROWS_AS(badf.solve(0.0, 0.1, 0.0, 0.0), Error);
}

TEST_CASE("singular trace on a level: fold family") {
  Model fold = Model::builtin("fold-canonical");
  // Singular curve: the v-axis; H there = v, so the trace sits at v = c.
  SingularTrace tr = singular_trace_on_level(fold, 0.3);
  CHECK(std::abs(tr.point.x) < 1e-10);
  CHECK(std::abs(tr.point.y) < 1e-10);
  CHECK(std::abs(tr.point.u) < 1e-10);
  CHECK(tr.point.v == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(tr.transversality == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(tr.c == 0.3);
}

TEST_CASE("singular trace on a level: cusp family") {
  Model cusp = Model::builtin("cusp-canonical");
  // c = 0 passes through the cusp point itself (a tangent crossing).
  SingularTrace t0 = singular_trace_on_level(cusp, 0.0);
  CHECK(std::abs(t0.point.x) < 1e-10);
  CHECK(std::abs(t0.point.v) < 1e-10);
  CHECK(std::abs(t0.transversality) < 1e-10);

  // c = 0.1 crosses the curve (x, 0, 2x^3, -3x^2) at a fold point.
  SingularTrace t1 =
      singular_trace_on_level(cusp, 0.1, {0.35, 0.0, 0.086, -0.37});
  CHECK(t1.point.v == doctest::Approx(-3 * t1.point.x * t1.point.x).epsilon(1e-9));
  CHECK(t1.point.u ==
        doctest::Approx(2 * std::pow(t1.point.x, 3)).epsilon(1e-9));
  CHECK(cusp.eval(t1.point.array()) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("fold limit coefficients of the canonical family") {
  Model fold = Model::builtin("fold-canonical");
  for (double c : {0.0, 0.4, -0.7}) {
    FoldLimitSystem sys = fold_coefficients(fold, c);
    CHECK(sys.alpha_c == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(sys.gamma_c == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(sys.s1 == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(std::abs(sys.alpha_residual) < 1e-9);
    CHECK(std::abs(sys.beta_residual) < 1e-9);
    CHECK(sys.trace.point.v == doctest::Approx(c).epsilon(1e-9));
    CHECK(sys.trace.transversality == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("cusp limit coefficients of the canonical family") {
  Model cusp = Model::builtin("cusp-canonical");
  CuspLimitSystem sys = cusp_coefficients(cusp, 0.0);
  CHECK(sys.rho == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sys.sigma == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sys.beta == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sys.alpha == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(sys.beta_literal) < 1e-10);
  CHECK(sys.genericity_det == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sys.generic);
  CHECK(std::abs(sys.a_offset) < 1e-15);  // left for the studies to fill
}

TEST_CASE("missing slow unfolding clears the genericity flag") {
  Model m = Model::parse("u + u*x + x^4/4 + y^2/2");
  CuspLimitSystem sys = cusp_coefficients(m, 0.0);
  CHECK(!sys.generic);
  CHECK(std::abs(sys.genericity_det) < 1e-10);
  CHECK(sys.alpha == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("family mismatches raise typed errors") {
  Model fold = Model::builtin("fold-canonical");
  Model cusp = Model::builtin("cusp-canonical");
  CHECK_THROWS_AS(cusp_coefficients(fold, 0.0), Error);
  try {
    cusp_coefficients(fold, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_a_cusp);
  }
  CHECK_THROWS_AS(fold_coefficients(cusp, 0.0), Error);
  try {
    fold_coefficients(cusp, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_a_fold);
  }
  // at c = 0.1 the cusp family's trace is an ordinary fold point
  FoldLimitSystem cross = fold_coefficients(cusp, 0.1, {0.35, 0.0, 0.086, -0.37});
  CHECK(std::abs(cross.alpha_residual) < 1e-8);
  CHECK(std::abs(cross.gamma_c) > 1e-3);
}

TEST_CASE("normal shift keeps graph points critical") {
  for (const char* family : {"fold-canonical", "cusp-canonical"}) {
    Model m = Model::builtin(family);
    NormalShiftReport rep = normal_shift_check(m, {0, 0, 0, 0}, 0.1, 50, 1234);
    CHECK(rep.samples == 50);
    CHECK(rep.max_residual < 1e-10);
  }
}

}  // TEST_SUITE
