#ifndef SLOWFAST_JET_HPP
#define SLOWFAST_JET_HPP

// Dense truncated Taylor arithmetic ("jets") in one to four variables.
//
// A Jet holds the coefficients of a polynomial of total degree <= degree()
// in graded-lexicographic monomial order (degree 0 first; within a degree,
// lexicographically by exponent tuple, first variable dominant).  All
// arithmetic truncates products above the degree bound, so a Jet propagates
// the Taylor expansion of a computation about a base point: coefficient of
// the monomial m equals (partial derivative for m) / m!.

#include <array>
#include <cstdint>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "slowfast/errors.hpp"

namespace slowfast {

// Exponent tuple; slots beyond num_vars stay zero.
using Multi = std::array<std::uint8_t, 4>;

int multi_total(const Multi& m);
double multi_factorial(const Multi& m);

// Shared immutable tables for one (num_vars, degree) combination: the
// monomial list, the inverse index, and the pairwise product index.
class JetLayout {
 public:
  static constexpr int max_vars = 4;
  static constexpr int max_degree = 12;

  // Returns the cached layout; layouts live for the whole process.
  static const JetLayout& get(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(monomials_.size()); }

  const Multi& exponents(int i) const { return monomials_[i]; }
  double exponent_factorial(int i) const { return factorial_[i]; }

  // Index of a monomial, or -1 when its total degree exceeds the bound.
  int index_of(const Multi& m) const;

  // Index of exponents(i) * exponents(j), or -1 when truncated away.
  int product_index(int i, int j) const { return product_[i * size() + j]; }

 private:
  JetLayout(int num_vars, int degree);

  int num_vars_;
  int degree_;
  std::vector<Multi> monomials_;
  std::vector<double> factorial_;
  std::vector<std::int32_t> product_;
  std::vector<int> index_;  // packed exponent key -> monomial index
};

class Jet {
 public:
  Jet() : Jet(constant(1, 0, 0.0)) {}

  static Jet constant(int num_vars, int degree, double value);
  // The jet of the coordinate function var_index about base value `value`.
  static Jet variable(int var_index, double value, int num_vars, int degree);

  int num_vars() const { return layout_->num_vars(); }
  int degree() const { return layout_->degree(); }
  int size() const { return layout_->size(); }
  const JetLayout& layout() const { return *layout_; }

  // Constant term (the value of the expanded function at the base point).
  double value() const { return coeff_[0]; }

  double raw(int i) const { return coeff_[i]; }
  double& raw(int i) { return coeff_[i]; }

  // Taylor coefficient of the given monomial (0 above the degree bound).
  double coeff(const Multi& m) const;
  // Partial derivative at the base point: coeff(m) * m!.
  double partial(const Multi& m) const;

  // Formal partial derivative; result has degree() - 1.
  Jet deriv(int var) const;

  // Evaluates this jet's polynomial at the given jets (one per variable);
  // all arguments must share a common layout, which the result inherits.
  // Exact up to the arguments' degree bound when the arguments' non-constant
  // parts vanish at the base point of the truncation (the usual case:
  // composing with displacement jets).
  Jet compose(const std::vector<Jet>& args) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(double s, const Jet& b);

  // 1 / this; requires |value()| above a hard underflow floor.
  Jet reciprocal() const;

 private:
  explicit Jet(const JetLayout* layout);
  void require_same_layout(const Jet& o) const;

  const JetLayout* layout_;
  boost::container::small_vector<double, 16> coeff_;
};

Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow_int(const Jet& a, int n);

// Gradient / symmetric Hessian helpers for full-variable jets (degree >= 1
// resp. >= 2): entries are partial derivatives at the base point.
std::array<double, 4> jet_gradient(const Jet& h);
std::array<std::array<double, 4>, 4> jet_hessian(const Jet& h);

}  // namespace slowfast

#endif
