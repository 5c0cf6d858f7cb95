#include <array>
#include <cmath>

#include "doctest.h"
#include "slowfast/dynamics.hpp"

using namespace slowfast;

TEST_SUITE("dynamics") {

TEST_CASE("vector field splits the gradient with the slow factor") {
  Model fold = Model::builtin("fold-canonical");
  // H = v + u x + x^3 + y^2/2: grad = (u + 3x^2, y, x, 1)
  PhasePoint p{0.5, -2.0, 1.5, 0.7};
  for (double eps : {0.0, 1e-3, 0.2}) {
    auto f = vector_field_full(fold, p, eps);
    CHECK(f[0] == doctest::Approx(-2.0).epsilon(1e-15));           // H_y
    CHECK(f[1] == doctest::Approx(-(1.5 + 0.75)).epsilon(1e-15));  // -H_x
    CHECK(f[2] == doctest::Approx(eps * 1.0).epsilon(1e-15));      // eps H_v
    CHECK(f[3] == doctest::Approx(-eps * 0.5).epsilon(1e-15));     // -eps H_u
  }
  CHECK_THROWS_AS(vector_field_full(fold, p, -1e-6), Error);
}

TEST_CASE("zero epsilon freezes the slow pair") {
  Model fold = Model::builtin("fold-canonical");
  Trajectory traj = integrate(fold, {1.0, 0.2, -3.0, 0.5}, 0.0, 0.0, 2.0, 1e-2);
  REQUIRE(!traj.aborted);
  for (const PhasePoint& q : traj.states) {
    CHECK(std::abs(q.u - -3.0) < 1e-12);
    CHECK(std::abs(q.v - 0.5) < 1e-12);
  }
}

TEST_CASE("midpoint steps are time-reversible") {
  Model fold = Model::builtin("fold-canonical");
  PhasePoint p0{0.9, 0.1, -3.0, 0.2};
  const double eps = 1e-2, h = 1e-3;
  PhasePoint p = p0;
  for (int i = 0; i < 1000; ++i) p = step_implicit_midpoint(fold, p, eps, h);
  for (int i = 0; i < 1000; ++i) p = step_implicit_midpoint(fold, p, eps, -h);
  CHECK(std::abs(p.x - p0.x) < 1e-10);
  CHECK(std::abs(p.y - p0.y) < 1e-10);
  CHECK(std::abs(p.u - p0.u) < 1e-10);
  CHECK(std::abs(p.v - p0.v) < 1e-10);
}

TEST_CASE("energy drift stays small over a slow unit of time") {
  Model fold = Model::builtin("fold-canonical");
  const double eps = 1e-3;
  Trajectory traj =
      integrate(fold, {1.0, 0.0, -3.0, 2.0}, eps, 0.0, 1.0, eps / 5, 100);
  REQUIRE(!traj.aborted);
  CHECK(traj.max_energy_drift < 1e-8);
}

TEST_CASE("second-order convergence on the rotation field") {
  // H = (x^2 + y^2)/2 at eps = 0 is an exact rotation of the fast pair.
  Model rot = Model::parse("x^2/2 + y^2/2");
  auto err_at = [&](double h) {
    Trajectory t = integrate(rot, {1.0, 0.0, 0, 0}, 0.0, 0.0, 1.0, h, 1 << 20);
    const PhasePoint& q = t.states.back();
    double ex = std::cos(1.0), ey = -std::sin(1.0);
    return std::hypot(q.x - ex, q.y - ey);
  };
  double e1 = err_at(1e-2), e2 = err_at(5e-3);
  double ratio = e1 / e2;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("one step preserves phase-space volume") {
  // The midpoint map is symplectic for the eps-weighted structure, so the
  // Jacobian of a single step has determinant 1; finite differences limit
  // the check to ~1e-6.
  Model m = Model::parse("v + u*x + x^3 + y^2/2 + 0.3*x*v + 0.1*u^2");
  PhasePoint p{0.4, -0.3, 0.8, -0.6};
  const double eps = 0.7, h = 0.05, d = 1e-6;
  double jac[4][4];
  for (int col = 0; col < 4; ++col) {
    std::array<double, 4> lo = p.array(), hi = p.array();
    hi[col] += d;
    lo[col] -= d;
    auto ph = step_implicit_midpoint(m, PhasePoint::from_array(hi), eps, h);
    auto pl = step_implicit_midpoint(m, PhasePoint::from_array(lo), eps, h);
    for (int row = 0; row < 4; ++row)
      jac[row][col] = (ph.array()[row] - pl.array()[row]) / (2 * d);
  }
  // 4x4 determinant by cofactor expansion
  auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
    return jac[r0][c0] * (jac[r1][c1] * jac[r2][c2] - jac[r1][c2] * jac[r2][c1]) -
           jac[r0][c1] * (jac[r1][c0] * jac[r2][c2] - jac[r1][c2] * jac[r2][c0]) +
           jac[r0][c2] * (jac[r1][c0] * jac[r2][c1] - jac[r1][c1] * jac[r2][c0]);
  };
  double det = jac[0][0] * det3(1, 2, 3, 1, 2, 3) -
               jac[0][1] * det3(1, 2, 3, 0, 2, 3) +
               jac[0][2] * det3(1, 2, 3, 0, 1, 3) -
               jac[0][3] * det3(1, 2, 3, 0, 1, 2);
  CHECK(det == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("integration lands exactly on the requested endpoint") {
  Model fold = Model::builtin("fold-canonical");
  Trajectory t = integrate(fold, {0.1, 0.0, -3.0, 0.0}, 1e-2, 0.0, 0.37, 0.1);
  CHECK(t.times.back() == 0.37);
  CHECK(t.times.front() == 0.0);
  // backward runs need a negative step
  Trajectory b = integrate(fold, {0.1, 0.0, -3.0, 0.0}, 1e-2, 0.0, -0.2, -0.05);
  CHECK(b.times.back() == -0.2);
  CHECK_THROWS_AS(integrate(fold, {0, 0, 0, 0}, 1e-2, 0.0, 1.0, -0.1), Error);
  CHECK_THROWS_AS(integrate(fold, {0, 0, 0, 0}, 1e-2, 0.0, 1.0, 0.0), Error);
}

TEST_CASE("stride thins the record but keeps both endpoints") {
  Model rot = Model::parse("x^2/2 + y^2/2");
  Trajectory t = integrate(rot, {1.0, 0.0, 0, 0}, 0.0, 0.0, 1.0, 0.01, 7);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  // samples: start, every 7th of 100 steps, and the endpoint
  CHECK(t.size() == 1 + 100 / 7 + 1);
}

TEST_CASE("newton divergence aborts with a partial trajectory") {
  // On the inverted quartic the solution escapes to infinity; a unit step
  // from x = 2 leaves the line search unable to shrink the residual.
  Model stiff = Model::parse("y^2/2 - x^4");
  CHECK_THROWS_AS(step_implicit_midpoint(stiff, {2.0, 1.0, 0, 0}, 0.0, 1.0),
                  Error);
  try {
    step_implicit_midpoint(stiff, {2.0, 1.0, 0, 0}, 0.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::newton_divergence);
  }
  // Starting further downhill, a few steps succeed before the blow-up: the
  // truncated trajectory keeps what was integrated plus the abort reason.
  Trajectory t = integrate(stiff, {0.5, 1.0, 0, 0}, 0.0, 0.0, 10.0, 1.0);
  CHECK(t.aborted);
  CHECK(!t.abort_reason.empty());
  CHECK(t.size() > 1);
  CHECK(t.times.back() < 10.0);
}

TEST_CASE("integrate_while stops at the predicate") {
  Model fold = Model::builtin("fold-canonical");
  // H_v = 1, so u grows linearly at rate eps exactly.
  const double eps = 0.1;
  auto keep = [](const PhasePoint& q) { return q.u < -0.5; };
  Trajectory t = integrate_while(fold, {1.0, 0.0, -1.0, 0.0}, eps, 0.01, keep,
                                 100000, 1);
  REQUIRE(!t.aborted);
  // u advances by eps * h per step, so the run stops just past the threshold
  CHECK(t.states.back().u >= -0.5 - 1e-12);
  CHECK(t.states.back().u <= -0.5 + eps * 0.01 + 1e-12);
  // max_steps caps the run
  Trajectory capped =
      integrate_while(fold, {1.0, 0.0, -1.0, 0.0}, eps, 0.01, keep, 10, 1);
  CHECK(capped.size() == 11);
}

TEST_CASE("fast layer matches the frozen-slow-pair flow") {
  Model fold = Model::builtin("fold-canonical");
  // At (u, v) = (-3, 0) the fast system has a center at (1, 0) with
  // frequency sqrt(6); a small loop returns after 2 pi / sqrt(6).
  const double freq = std::sqrt(6.0);
  const double period = 2 * M_PI / freq;
  Trajectory t =
      integrate_fast_layer(fold, -3.0, 0.0, 1.001, 0.0, 0.0, period, period / 4000);
  REQUIRE(!t.aborted);
  const PhasePoint& q = t.states.back();
  CHECK(q.x == doctest::Approx(1.001).epsilon(1e-6));
  CHECK(std::abs(q.y) < 1e-6);
  CHECK(q.u == -3.0);
  CHECK(q.v == 0.0);
}

}  // TEST_SUITE
