#ifndef SLOWFAST_MODEL_HPP
#define SLOWFAST_MODEL_HPP

// Hamiltonians H(x, y, u, v) given as expression text.
//
// Grammar (precedence low to high): '+'/'-', '*'/'/', unary '-', '^' with a
// literal integer exponent (left-associative).  Variables are x, y, u, v
// ((x, y) the fast pair, (u, v) the slow pair); exp, sin, cos, sqrt are
// builtin functions; every other identifier is a named parameter that must
// be bound to a value before evaluation.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "slowfast/jet.hpp"

namespace slowfast {

class Model {
 public:
  // Parses a bare expression.
  static Model parse(std::string_view text);
  // Parses model-file text: optional "param NAME = VALUE" header lines and
  // comment/blank lines, followed by the expression (may span lines).
  static Model parse_file_text(std::string_view text);
  static Model load(const std::string& path);
  // "fold-canonical" or "cusp-canonical" (aliases "fold", "cusp"):
  //   fold-canonical: v + u*x + b*x^2 + c*x^3 + q*x^4 + H1*y^2
  //                   with b = 0, c = 1, q = 0, H1 = 0.5
  //   cusp-canonical: h0*u + u*x + (v/2)*x^2 + (a4/4)*x^4 + H1*y^2
  //                   with h0 = 1, a4 = 1, H1 = 0.5
  static Model builtin(std::string_view family);

  // Returns a copy with the named parameter bound (rebinding is allowed).
  Model bind(const std::string& name, double value) const;

  const std::string& source() const;
  // Canonical expression text; parse(print()) reproduces the model.
  std::string print() const;
  std::vector<std::string> parameter_names() const;
  std::vector<std::string> unbound_parameters() const;
  // Bound parameter values by name.
  std::map<std::string, double> parameters() const;
  // Hash over source text and bound parameter values.
  std::uint64_t hash() const;

  double eval(const std::array<double, 4>& p) const;
  double operator()(double x, double y, double u, double v) const {
    return eval({x, y, u, v});
  }

  // Taylor expansion about p in the active variables (listed in x, y, u, v
  // order); inactive variables are frozen at their p values.
  Jet eval_jet(const std::array<double, 4>& p, const std::array<bool, 4>& active,
               int degree) const;
  // All four variables active.
  Jet full_jet(const std::array<double, 4>& p, int degree = 4) const;

  struct Ast;  // expression representation; defined with the implementation

 private:
  Model(std::shared_ptr<const Ast> ast, std::vector<double> values,
        std::vector<char> bound);

  std::shared_ptr<const Ast> ast_;
  std::vector<double> values_;  // parameter slot values
  std::vector<char> bound_;     // parameter slot bound flags
};

}  // namespace slowfast

#endif
