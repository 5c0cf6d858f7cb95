#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "slowfast/jet.hpp"

using namespace slowfast;

namespace {

// Map-based polynomial arithmetic: an independent oracle for jet products.
using poly = std::map<Multi, double>;

poly pmul(const poly& a, const poly& b, int degree) {
  poly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      Multi m{};
      int tot = 0;
      for (int k = 0; k < 4; ++k) {
        m[k] = static_cast<std::uint8_t>(ma[k] + mb[k]);
        tot += m[k];
      }
      if (tot > degree) continue;
      out[m] += ca * cb;
    }
  return out;
}

poly padd(const poly& a, const poly& b) {
  poly out = a;
  for (const auto& [m, c] : b) out[m] += c;
  return out;
}

poly pscale(const poly& a, double s) {
  poly out = a;
  for (auto& [m, c] : out) c *= s;
  return out;
}

double pcoeff(const poly& p, const Multi& m) {
  auto it = p.find(m);
  return it == p.end() ? 0.0 : it->second;
}

poly random_poly(std::mt19937_64& rng, int num_vars, int degree) {
  const JetLayout& lay = JetLayout::get(num_vars, degree);
  std::uniform_real_distribution<double> coin(-1.0, 1.0);
  poly out;
  for (int i = 0; i < lay.size(); ++i) out[lay.exponents(i)] = coin(rng);
  return out;
}

Jet to_jet(const poly& p, int num_vars, int degree) {
  Jet j = Jet::constant(num_vars, degree, 0.0);
  for (const auto& [m, c] : p) {
    int idx = j.layout().index_of(m);
    REQUIRE(idx >= 0);
    j.raw(idx) = c;
  }
  return j;
}

void check_equal(const Jet& j, const poly& p, double tol) {
  for (int i = 0; i < j.size(); ++i) {
    CHECK(j.raw(i) ==
          doctest::Approx(pcoeff(p, j.layout().exponents(i))).epsilon(tol));
  }
}

double binom(double a, int k) {
  double out = 1;
  for (int i = 0; i < k; ++i) out *= (a - i) / (i + 1);
  return out;
}

}  // namespace

TEST_SUITE("jet") {

TEST_CASE("layout enumerates graded order, first variable dominant") {
  const JetLayout& lay = JetLayout::get(2, 3);
  std::vector<std::array<int, 2>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0},
                                          {1, 1}, {0, 2}, {3, 0}, {2, 1},
                                          {1, 2}, {0, 3}};
  REQUIRE(lay.size() == static_cast<int>(want.size()));
  for (int i = 0; i < lay.size(); ++i) {
    CHECK(lay.exponents(i)[0] == want[i][0]);
    CHECK(lay.exponents(i)[1] == want[i][1]);
    CHECK(lay.exponents(i)[2] == 0);
    CHECK(lay.index_of(lay.exponents(i)) == i);
  }
  // (n + d choose d) counting for the four-variable layout used by models
  CHECK(JetLayout::get(4, 4).size() == 70);
  CHECK(JetLayout::get(3, 6).size() == 84);
}

TEST_CASE("index_of rejects truncated and foreign monomials") {
  const JetLayout& lay = JetLayout::get(2, 3);
  CHECK(lay.index_of(Multi{4, 0, 0, 0}) == -1);
  CHECK(lay.index_of(Multi{2, 2, 0, 0}) == -1);
  CHECK(lay.index_of(Multi{0, 0, 1, 0}) == -1);  // var outside num_vars
  CHECK(lay.index_of(Multi{0, 0, 0, 0}) == 0);
}

TEST_CASE("layout bounds are enforced") {
  CHECK_THROWS_AS(JetLayout::get(5, 3), Error);
  CHECK_THROWS_AS(JetLayout::get(0, 3), Error);
  CHECK_THROWS_AS(JetLayout::get(2, 13), Error);
  try {
    JetLayout::get(5, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}

TEST_CASE("product matches the map-polynomial oracle") {
  std::mt19937_64 rng(20240801);
  for (int trial = 0; trial < 20; ++trial) {
    int num_vars = 1 + static_cast<int>(rng() % 4);
    int degree = 2 + static_cast<int>(rng() % 4);
    poly pa = random_poly(rng, num_vars, degree);
    poly pb = random_poly(rng, num_vars, degree);
    Jet ja = to_jet(pa, num_vars, degree);
    Jet jb = to_jet(pb, num_vars, degree);
    check_equal(ja * jb, pmul(pa, pb, degree), 1e-13);
    check_equal(ja + jb, padd(pa, pb), 1e-15);
    check_equal(ja * 3.5 - jb, padd(pscale(pa, 3.5), pscale(pb, -1)), 1e-14);
  }
}

TEST_CASE("product is commutative and distributes over addition") {
  std::mt19937_64 rng(7);
  poly pa = random_poly(rng, 3, 4);
  poly pb = random_poly(rng, 3, 4);
  poly pc = random_poly(rng, 3, 4);
  Jet a = to_jet(pa, 3, 4), b = to_jet(pb, 3, 4), c = to_jet(pc, 3, 4);
  Jet lhs = a * (b + c);
  Jet rhs = a * b + a * c;
  for (int i = 0; i < lhs.size(); ++i)
    CHECK(lhs.raw(i) == doctest::Approx(rhs.raw(i)).epsilon(1e-14));
  // The convolution accumulates in a different order for the two factor
  // orders, so equality holds only up to roundoff.
  Jet ab = a * b, ba = b * a;
  for (int i = 0; i < ab.size(); ++i)
    CHECK(ab.raw(i) == doctest::Approx(ba.raw(i)).epsilon(1e-14));
}

TEST_CASE("products above the degree bound are dropped") {
  Jet x = Jet::variable(0, 0.0, 1, 5);
  Jet x3 = pow_int(x, 3);
  Jet x6 = x3 * x3;  // degree 6 term truncates to nothing
  for (int i = 0; i < x6.size(); ++i) CHECK(x6.raw(i) == 0.0);
}

TEST_CASE("reciprocal inverts within roundoff") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    poly pa = random_poly(rng, 2, 5);
    pa[Multi{0, 0, 0, 0}] = 2.0 + trial * 0.25;  // keep the constant term away from 0
    Jet a = to_jet(pa, 2, 5);
    Jet prod = a * a.reciprocal();
    CHECK(prod.value() == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 1; i < prod.size(); ++i) CHECK(std::abs(prod.raw(i)) < 1e-13);
    Jet quot = (a / a);
    CHECK(quot.value() == doctest::Approx(1.0).epsilon(1e-14));
  }
  Jet tiny = Jet::constant(1, 3, 0.0);
  CHECK_THROWS_AS(tiny.reciprocal(), Error);
}

TEST_CASE("series coefficients match the factorial formulas") {
  const double a = 0.7;
  Jet t = Jet::variable(0, a, 1, 8);
  Jet e = exp(t), s = sin(t), c = cos(t), r = sqrt(t);
  double fact = 1;
  for (int k = 0; k <= 8; ++k) {
    if (k > 0) fact *= k;
    Multi m{static_cast<std::uint8_t>(k), 0, 0, 0};
    CHECK(e.coeff(m) == doctest::Approx(std::exp(a) / fact).epsilon(1e-14));
    CHECK(s.coeff(m) ==
          doctest::Approx(std::sin(a + k * M_PI / 2) / fact).epsilon(1e-13));
    CHECK(c.coeff(m) ==
          doctest::Approx(std::cos(a + k * M_PI / 2) / fact).epsilon(1e-13));
    CHECK(r.coeff(m) ==
          doctest::Approx(binom(0.5, k) * std::pow(a, 0.5 - k)).epsilon(1e-12));
  }
}

TEST_CASE("pythagorean identity holds as a jet identity") {
  Jet t = Jet::variable(0, 1.3, 1, 10);
  Jet one = sin(t) * sin(t) + cos(t) * cos(t);
  CHECK(one.value() == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 1; i < one.size(); ++i) CHECK(std::abs(one.raw(i)) < 1e-14);
}

TEST_CASE("pow_int expands binomially and handles negative powers") {
  Jet x = Jet::variable(0, 1.0, 1, 6);  // 1 + t
  Jet p5 = pow_int(x, 5);
  for (int k = 0; k <= 6; ++k) {
    Multi m{static_cast<std::uint8_t>(k), 0, 0, 0};
    CHECK(p5.coeff(m) == doctest::Approx(k <= 5 ? binom(5.0, k) : 0.0));
  }
  Jet pm2 = pow_int(x, -2);  // (1 + t)^-2 = sum (k+1) (-t)^k
  for (int k = 0; k <= 6; ++k) {
    Multi m{static_cast<std::uint8_t>(k), 0, 0, 0};
    double want = (k + 1) * ((k % 2) ? -1.0 : 1.0);
    CHECK(pm2.coeff(m) == doctest::Approx(want).epsilon(1e-13));
  }
  CHECK(pow_int(x, 0).value() == 1.0);
}

TEST_CASE("compose substitutes a displacement jet exactly") {
  // exp expanded about a, then composed with w(s, t) = s + 2 t + s t,
  // must reproduce the Taylor coefficients of exp(a + w) about (0, 0).
  const double a = 0.4;
  const int deg = 6;
  Jet f = exp(Jet::variable(0, a, 1, deg));
  Jet s = Jet::variable(0, 0.0, 2, deg);
  Jet t = Jet::variable(1, 0.0, 2, deg);
  Jet w = s + 2.0 * t + s * t;
  Jet composed = f.compose({w});

  poly pw;
  pw[Multi{1, 0, 0, 0}] = 1.0;
  pw[Multi{0, 1, 0, 0}] = 2.0;
  pw[Multi{1, 1, 0, 0}] = 1.0;
  poly acc;  // exp(a) * sum w^k / k!
  acc[Multi{0, 0, 0, 0}] = 1.0;
  poly wk;
  wk[Multi{0, 0, 0, 0}] = 1.0;
  double fact = 1;
  for (int k = 1; k <= deg; ++k) {
    wk = pmul(wk, pw, deg);
    fact *= k;
    acc = padd(acc, pscale(wk, 1.0 / fact));
  }
  acc = pscale(acc, std::exp(a));
  check_equal(composed, acc, 1e-12);
}

TEST_CASE("deriv matches the shifted-coefficient rule") {
  std::mt19937_64 rng(23);
  poly p = random_poly(rng, 3, 5);
  Jet j = to_jet(p, 3, 5);
  for (int var = 0; var < 3; ++var) {
    Jet d = j.deriv(var);
    CHECK(d.degree() == 4);
    for (int i = 0; i < d.size(); ++i) {
      Multi m = d.layout().exponents(i);
      Multi up = m;
      up[var] = static_cast<std::uint8_t>(up[var] + 1);
      CHECK(d.raw(i) ==
            doctest::Approx(up[var] * pcoeff(p, up)).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(j.deriv(3), Error);
  CHECK_THROWS_AS(Jet::constant(2, 0, 1.0).deriv(0), Error);
}

TEST_CASE("partial rescales coefficients by the monomial factorial") {
  std::mt19937_64 rng(29);
  poly p = random_poly(rng, 4, 4);
  Jet j = to_jet(p, 4, 4);
  for (int i = 0; i < j.size(); ++i) {
    Multi m = j.layout().exponents(i);
    CHECK(j.partial(m) ==
          doctest::Approx(pcoeff(p, m) * multi_factorial(m)).epsilon(1e-15));
  }
  // Above the bound, the stored coefficient is a true zero, but the partial
  // is not represented at all, so asking for it is an error.
  CHECK(j.coeff(Multi{5, 0, 0, 0}) == 0.0);
  CHECK_THROWS_AS(j.partial(Multi{5, 0, 0, 0}), Error);
}

TEST_CASE("gradient and hessian agree with hand derivatives") {
  // H = x^2 y + 3 x v^3 + u y at (0.3, -0.7, 0.2, 0.4)
  const double x = 0.3, y = -0.7, u = 0.2, v = 0.4;
  Jet jx = Jet::variable(0, x, 4, 3);
  Jet jy = Jet::variable(1, y, 4, 3);
  Jet ju = Jet::variable(2, u, 4, 3);
  Jet jv = Jet::variable(3, v, 4, 3);
  Jet h = jx * jx * jy + 3.0 * jx * jv * jv * jv + ju * jy;

  auto grad = jet_gradient(h);
  CHECK(grad[0] == doctest::Approx(2 * x * y + 3 * v * v * v).epsilon(1e-14));
  CHECK(grad[1] == doctest::Approx(x * x + u).epsilon(1e-14));
  CHECK(grad[2] == doctest::Approx(y).epsilon(1e-14));
  CHECK(grad[3] == doctest::Approx(9 * x * v * v).epsilon(1e-14));

  auto hess = jet_hessian(h);
  CHECK(hess[0][0] == doctest::Approx(2 * y).epsilon(1e-14));
  CHECK(hess[0][1] == doctest::Approx(2 * x).epsilon(1e-14));
  CHECK(hess[0][3] == doctest::Approx(9 * v * v).epsilon(1e-14));
  CHECK(hess[1][2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hess[3][3] == doctest::Approx(18 * x * v).epsilon(1e-14));
  CHECK(hess[2][2] == 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(hess[i][j] == hess[j][i]);
}

TEST_CASE("variable jets carry their base value") {
  Jet v = Jet::variable(2, -1.5, 4, 2);
  CHECK(v.value() == -1.5);
  CHECK(v.coeff(Multi{0, 0, 1, 0}) == 1.0);
  CHECK(v.coeff(Multi{1, 0, 0, 0}) == 0.0);
  CHECK_THROWS_AS(Jet::variable(4, 0.0, 4, 2), Error);
  CHECK_THROWS_AS(Jet::variable(2, 0.0, 2, 2), Error);
}

}  // TEST_SUITE
