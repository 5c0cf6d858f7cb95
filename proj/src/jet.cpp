#include "slowfast/jet.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace slowfast {

int multi_total(const Multi& m) { return m[0] + m[1] + m[2] + m[3]; }

double multi_factorial(const Multi& m) {
  static const double fact[13] = {1,      1,       2,        6,        24,
                                  120,    720,     5040,     40320,    362880,
                                  3628800, 39916800, 479001600};
  return fact[m[0]] * fact[m[1]] * fact[m[2]] * fact[m[3]];
}

namespace {

void enumerate(int num_vars, int degree, int var, int remaining, Multi& cur,
               std::vector<Multi>& out) {
  if (var == num_vars - 1) {
    cur[var] = static_cast<std::uint8_t>(remaining);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = static_cast<std::uint8_t>(e);
    enumerate(num_vars, degree, var + 1, remaining - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

JetLayout::JetLayout(int num_vars, int degree)
    : num_vars_(num_vars), degree_(degree) {
  Multi cur{0, 0, 0, 0};
  for (int d = 0; d <= degree; ++d)
    enumerate(num_vars, degree, 0, d, cur, monomials_);

  factorial_.resize(monomials_.size());
  for (std::size_t i = 0; i < monomials_.size(); ++i)
    factorial_[i] = multi_factorial(monomials_[i]);

  // Direct-addressed inverse index over 4-bit-packed exponent keys.
  index_.assign(std::size_t(degree + 1) << 12, -1);
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    const Multi& m = monomials_[i];
    std::size_t key = std::size_t(m[0]) | (std::size_t(m[1]) << 4) |
                      (std::size_t(m[2]) << 8) | (std::size_t(m[3]) << 12);
    if (key < index_.size()) index_[key] = static_cast<int>(i);
  }

  const int n = size();
  product_.assign(std::size_t(n) * n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (multi_total(monomials_[i]) + multi_total(monomials_[j]) > degree)
        continue;
      Multi s;
      for (int k = 0; k < 4; ++k)
        s[k] = static_cast<std::uint8_t>(monomials_[i][k] + monomials_[j][k]);
      product_[std::size_t(i) * n + j] = index_of(s);
    }
  }
}

int JetLayout::index_of(const Multi& m) const {
  if (multi_total(m) > degree_) return -1;
  for (int k = num_vars_; k < 4; ++k)
    if (m[k] != 0) return -1;
  std::size_t key = std::size_t(m[0]) | (std::size_t(m[1]) << 4) |
                    (std::size_t(m[2]) << 8) | (std::size_t(m[3]) << 12);
  if (key >= index_.size()) return -1;
  return index_[key];
}

const JetLayout& JetLayout::get(int num_vars, int degree) {
  if (num_vars < 1 || num_vars > max_vars)
    fail(ErrorCode::invalid_argument,
         "jet variable count must be between 1 and 4, got " +
             std::to_string(num_vars));
  if (degree < 0 || degree > max_degree)
    fail(ErrorCode::invalid_argument,
         "jet degree must be between 0 and " + std::to_string(max_degree) +
             ", got " + std::to_string(degree));

  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{num_vars, degree}];
  if (!slot) slot.reset(new JetLayout(num_vars, degree));
  return *slot;
}

//----------------------------------------------------------------------------

Jet::Jet(const JetLayout* layout) : layout_(layout) {
  coeff_.assign(layout->size(), 0.0);
}

Jet Jet::constant(int num_vars, int degree, double value) {
  Jet j(&JetLayout::get(num_vars, degree));
  j.coeff_[0] = value;
  return j;
}

Jet Jet::variable(int var_index, double value, int num_vars, int degree) {
  if (var_index < 0 || var_index >= num_vars)
    fail(ErrorCode::invalid_argument,
         "jet variable index " + std::to_string(var_index) +
             " out of range for " + std::to_string(num_vars) + " variables");
  Jet j(&JetLayout::get(num_vars, degree));
  j.coeff_[0] = value;
  if (degree >= 1) {
    Multi m{0, 0, 0, 0};
    m[var_index] = 1;
    j.coeff_[j.layout_->index_of(m)] = 1.0;
  }
  return j;
}

void Jet::require_same_layout(const Jet& o) const {
  if (layout_ != o.layout_)
    fail(ErrorCode::invalid_argument,
         "jet layout mismatch: (" + std::to_string(num_vars()) + "," +
             std::to_string(degree()) + ") vs (" +
             std::to_string(o.num_vars()) + "," + std::to_string(o.degree()) +
             ")");
}

double Jet::coeff(const Multi& m) const {
  int i = layout_->index_of(m);
  if (i < 0) return 0.0;
  return coeff_[i];
}

double Jet::partial(const Multi& m) const {
  int i = layout_->index_of(m);
  if (i < 0)
    fail(ErrorCode::invalid_argument,
         "requested partial exceeds jet degree bound");
  return coeff_[i] * layout_->exponent_factorial(i);
}

Jet Jet::deriv(int var) const {
  if (var < 0 || var >= num_vars())
    fail(ErrorCode::invalid_argument, "derivative variable index out of range");
  if (degree() == 0)
    fail(ErrorCode::invalid_argument, "cannot differentiate a degree-0 jet");
  Jet out(&JetLayout::get(num_vars(), degree() - 1));
  for (int i = 0; i < size(); ++i) {
    const Multi& m = layout_->exponents(i);
    if (m[var] == 0) continue;
    Multi t = m;
    t[var] = static_cast<std::uint8_t>(t[var] - 1);
    out.coeff_[out.layout_->index_of(t)] += coeff_[i] * m[var];
  }
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (auto& c : out.coeff_) c = -c;
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  require_same_layout(o);
  for (int i = 0; i < size(); ++i) coeff_[i] += o.coeff_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same_layout(o);
  for (int i = 0; i < size(); ++i) coeff_[i] -= o.coeff_[i];
  return *this;
}

Jet& Jet::operator+=(double s) {
  coeff_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  coeff_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeff_) c *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  for (auto& c : coeff_) c /= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.require_same_layout(b);
  Jet out(a.layout_);
  const int n = a.size();
  for (int i = 0; i < n; ++i) {
    double ai = a.coeff_[i];
    if (ai == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      int k = a.layout_->product_index(i, j);
      if (k < 0) continue;
      out.coeff_[k] += ai * b.coeff_[j];
    }
  }
  return out;
}

Jet Jet::reciprocal() const {
  const double c0 = coeff_[0];
  if (std::abs(c0) <= 1e-300)
    fail(ErrorCode::invalid_argument,
         "jet reciprocal: constant term too close to zero");
  // 1/(c0 (1+q)) with q = this/c0 - 1; Horner sum of the geometric series.
  Jet q = *this;
  q /= c0;
  q.coeff_[0] = 0.0;
  Jet r = Jet::constant(num_vars(), degree(), 1.0);
  for (int k = 0; k < degree(); ++k) r = 1.0 - q * r;
  r /= c0;
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }

Jet operator/(double s, const Jet& b) { return b.reciprocal() * s; }

Jet Jet::compose(const std::vector<Jet>& args) const {
  if (static_cast<int>(args.size()) != num_vars())
    fail(ErrorCode::invalid_argument,
         "compose: expected " + std::to_string(num_vars()) +
             " argument jets, got " + std::to_string(args.size()));
  for (const Jet& a : args) args[0].require_same_layout(a);
  const JetLayout& tl = args[0].layout();

  // Per-variable power tables up to the largest exponent in use.
  std::array<int, 4> max_exp{0, 0, 0, 0};
  for (int i = 0; i < size(); ++i)
    for (int k = 0; k < num_vars(); ++k)
      max_exp[k] = std::max<int>(max_exp[k], layout_->exponents(i)[k]);
  std::array<std::vector<Jet>, 4> powers;
  for (int k = 0; k < num_vars(); ++k) {
    powers[k].reserve(max_exp[k] + 1);
    powers[k].push_back(Jet::constant(tl.num_vars(), tl.degree(), 1.0));
    for (int e = 1; e <= max_exp[k]; ++e)
      powers[k].push_back(powers[k].back() * args[k]);
  }

  Jet out = Jet::constant(tl.num_vars(), tl.degree(), 0.0);
  for (int i = 0; i < size(); ++i) {
    double c = coeff_[i];
    if (c == 0.0) continue;
    const Multi& m = layout_->exponents(i);
    Jet term = Jet::constant(tl.num_vars(), tl.degree(), c);
    for (int k = 0; k < num_vars(); ++k)
      if (m[k] > 0) term = term * powers[k][m[k]];
    out += term;
  }
  return out;
}

namespace {

// Sum of taylor[k] * (a - a0)^k by Horner, where taylor[k] = f^(k)(a0)/k!.
Jet analytic_series(const Jet& a, const std::vector<double>& taylor) {
  Jet w = a;
  w -= a.value();
  Jet r = Jet::constant(a.num_vars(), a.degree(), taylor.back());
  for (int k = static_cast<int>(taylor.size()) - 2; k >= 0; --k)
    r = r * w + taylor[k];
  return r;
}

}  // namespace

Jet exp(const Jet& a) {
  const double e0 = std::exp(a.value());
  std::vector<double> t(a.degree() + 1);
  double f = 1.0;
  for (int k = 0; k <= a.degree(); ++k) {
    if (k > 0) f *= k;
    t[k] = e0 / f;
  }
  return analytic_series(a, t);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> t(a.degree() + 1);
  double f = 1.0;
  for (int k = 0; k <= a.degree(); ++k) {
    if (k > 0) f *= k;
    t[k] = cycle[k % 4] / f;
  }
  return analytic_series(a, t);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> t(a.degree() + 1);
  double f = 1.0;
  for (int k = 0; k <= a.degree(); ++k) {
    if (k > 0) f *= k;
    t[k] = cycle[k % 4] / f;
  }
  return analytic_series(a, t);
}

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0))
    fail(ErrorCode::invalid_argument,
         "sqrt of a jet requires a positive constant term");
  // Binomial series: t[k] = t[k-1] * (1/2 - (k-1)) / (k * a0).
  std::vector<double> t(a.degree() + 1);
  t[0] = std::sqrt(a0);
  for (int k = 1; k <= a.degree(); ++k)
    t[k] = t[k - 1] * (0.5 - (k - 1)) / (k * a0);
  return analytic_series(a, t);
}

Jet pow_int(const Jet& a, int n) {
  if (n < 0) return pow_int(a.reciprocal(), -n);
  Jet result = Jet::constant(a.num_vars(), a.degree(), 1.0);
  Jet base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) result = result * base;
    base = base * base;
    e >>= 1;
  }
  return result;
}

std::array<double, 4> jet_gradient(const Jet& h) {
  if (h.degree() < 1)
    fail(ErrorCode::invalid_argument, "gradient requires a degree >= 1 jet");
  std::array<double, 4> g{0, 0, 0, 0};
  for (int k = 0; k < h.num_vars(); ++k) {
    Multi m{0, 0, 0, 0};
    m[k] = 1;
    g[k] = h.partial(m);
  }
  return g;
}

std::array<std::array<double, 4>, 4> jet_hessian(const Jet& h) {
  if (h.degree() < 2)
    fail(ErrorCode::invalid_argument, "hessian requires a degree >= 2 jet");
  std::array<std::array<double, 4>, 4> out{};
  for (int i = 0; i < h.num_vars(); ++i) {
    for (int j = i; j < h.num_vars(); ++j) {
      Multi m{0, 0, 0, 0};
      m[i] = static_cast<std::uint8_t>(m[i] + 1);
      m[j] = static_cast<std::uint8_t>(m[j] + 1);
      double val = h.partial(m);
      out[i][j] = val;
      out[j][i] = val;
    }
  }
  return out;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unbound_parameter: return "unbound_parameter";
    case ErrorCode::newton_divergence: return "newton_divergence";
    case ErrorCode::singular_jacobian: return "singular_jacobian";
    case ErrorCode::chart_invalid: return "chart_invalid";
    case ErrorCode::not_on_slow_manifold: return "not_on_slow_manifold";
    case ErrorCode::branch_invalid: return "branch_invalid";
    case ErrorCode::not_a_fold: return "not_a_fold";
    case ErrorCode::not_a_cusp: return "not_a_cusp";
    case ErrorCode::classification_mismatch: return "classification_mismatch";
    case ErrorCode::continuation_stall: return "continuation_stall";
    case ErrorCode::degenerate_coefficients: return "degenerate_coefficients";
    case ErrorCode::pole_in_window: return "pole_in_window";
    case ErrorCode::mismatched_epsilon: return "mismatched_epsilon";
    case ErrorCode::transversality_failure: return "transversality_failure";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace slowfast
