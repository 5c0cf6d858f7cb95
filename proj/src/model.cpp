#include "slowfast/model.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace slowfast {

namespace {

enum class NodeKind : std::uint8_t {
  number,
  variable,   // var 0..3 = x, y, u, v
  parameter,  // slot into the parameter table
  negate,
  add,
  sub,
  mul,
  div,
  pow,   // child a raised to integer exponent
  call,  // builtin function of child a
};

enum class Fn : std::uint8_t { fn_exp, fn_sin, fn_cos, fn_sqrt };

struct Node {
  NodeKind kind;
  double number = 0;
  int var = -1;
  int param = -1;
  int ipow = 0;
  Fn fn = Fn::fn_exp;
  int a = -1;
  int b = -1;
};

const char* kVarNames[4] = {"x", "y", "u", "v"};

}  // namespace

struct Model::Ast {
  std::string source;
  std::vector<Node> nodes;
  int root = -1;
  std::vector<std::string> param_names;

  int param_slot(const std::string& name) {
    for (std::size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == name) return static_cast<int>(i);
    param_names.push_back(name);
    return static_cast<int>(param_names.size() - 1);
  }
};

namespace {

//----------------------------------------------------------------------------
// Parsing

struct Token {
  enum Type { number, ident, op, end } type;
  std::string text;
  double value = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    Token t;
    t.offset = pos_;
    if (pos_ >= text_.size()) {
      t.type = Token::end;
      return t;
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      const char* begin = text_.data() + pos_;
      char* endp = nullptr;
      t.value = std::strtod(begin, &endp);
      std::size_t len = static_cast<std::size_t>(endp - begin);
      t.type = Token::number;
      t.text = std::string(text_.substr(pos_, len));
      pos_ += len;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      t.type = Token::ident;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (std::string("+-*/^()").find(c) != std::string::npos) {
      t.type = Token::op;
      t.text = std::string(1, c);
      ++pos_;
      return t;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c +
                               "' at offset " + std::to_string(pos_));
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, Model::Ast& ast) : lex_(text), ast_(ast) {
    advance();
  }

  int parse_expression() {
    int node = parse_term();
    while (is_op("+") || is_op("-")) {
      bool plus = cur_.text == "+";
      advance();
      int rhs = parse_term();
      node = make_binary(plus ? NodeKind::add : NodeKind::sub, node, rhs);
    }
    return node;
  }

  void expect_end() {
    if (cur_.type != Token::end)
      throw ParseError(cur_.offset, "syntax error at offset " +
                                        std::to_string(cur_.offset) +
                                        ": unexpected '" + describe(cur_) + "'");
  }

 private:
  bool is_op(const char* s) const {
    return cur_.type == Token::op && cur_.text == s;
  }

  static std::string describe(const Token& t) {
    if (t.type == Token::end) return "end of input";
    return t.text;
  }

  void advance() { cur_ = lex_.next(); }

  int make_node(Node n) {
    ast_.nodes.push_back(n);
    return static_cast<int>(ast_.nodes.size() - 1);
  }

  int make_binary(NodeKind k, int a, int b) {
    Node n;
    n.kind = k;
    n.a = a;
    n.b = b;
    return make_node(n);
  }

  int parse_term() {
    int node = parse_factor();
    while (is_op("*") || is_op("/")) {
      bool times = cur_.text == "*";
      advance();
      int rhs = parse_factor();
      node = make_binary(times ? NodeKind::mul : NodeKind::div, node, rhs);
    }
    return node;
  }

  int parse_factor() {
    if (is_op("-")) {
      advance();
      int child = parse_factor();
      Node n;
      n.kind = NodeKind::negate;
      n.a = child;
      return make_node(n);
    }
    return parse_power();
  }

  int parse_power() {
    int node = parse_atom();
    while (is_op("^")) {
      advance();
      int sign = 1;
      if (is_op("-")) {
        sign = -1;
        advance();
      }
      if (cur_.type != Token::number)
        throw ParseError(cur_.offset,
                         "syntax error at offset " + std::to_string(cur_.offset) +
                             ": integer exponent expected after '^'");
      double val = cur_.value;
      if (val != std::floor(val) || std::abs(val) > 64)
        throw ParseError(cur_.offset,
                         "syntax error at offset " + std::to_string(cur_.offset) +
                             ": exponent must be a small integer literal");
      advance();
      Node n;
      n.kind = NodeKind::pow;
      n.a = node;
      n.ipow = sign * static_cast<int>(val);
      node = make_node(n);
    }
    return node;
  }

  int parse_atom() {
    if (cur_.type == Token::number) {
      Node n;
      n.kind = NodeKind::number;
      n.number = cur_.value;
      advance();
      return make_node(n);
    }
    if (cur_.type == Token::ident) {
      std::string name = cur_.text;
      std::size_t off = cur_.offset;
      advance();
      for (int k = 0; k < 4; ++k) {
        if (name == kVarNames[k]) {
          Node n;
          n.kind = NodeKind::variable;
          n.var = k;
          return make_node(n);
        }
      }
      static const std::pair<const char*, Fn> fns[] = {
          {"exp", Fn::fn_exp}, {"sin", Fn::fn_sin},
          {"cos", Fn::fn_cos}, {"sqrt", Fn::fn_sqrt}};
      for (const auto& [fname, fn] : fns) {
        if (name == fname) {
          if (!is_op("("))
            throw ParseError(off, "syntax error at offset " +
                                      std::to_string(off) + ": function '" +
                                      name + "' requires parentheses");
          advance();
          int arg = parse_expression();
          if (!is_op(")"))
            throw ParseError(cur_.offset,
                             "syntax error at offset " +
                                 std::to_string(cur_.offset) +
                                 ": expected ')' to close call to '" + name + "'");
          advance();
          Node n;
          n.kind = NodeKind::call;
          n.fn = fn;
          n.a = arg;
          return make_node(n);
        }
      }
      Node n;
      n.kind = NodeKind::parameter;
      n.param = ast_.param_slot(name);
      return make_node(n);
    }
    if (is_op("(")) {
      advance();
      int node = parse_expression();
      if (!is_op(")"))
        throw ParseError(cur_.offset, "syntax error at offset " +
                                          std::to_string(cur_.offset) +
                                          ": expected ')'");
      advance();
      return node;
    }
    throw ParseError(cur_.offset, "syntax error at offset " +
                                      std::to_string(cur_.offset) +
                                      ": unexpected '" + describe(cur_) + "'");
  }

  Lexer lex_;
  Token cur_;
  Model::Ast& ast_;
};

//----------------------------------------------------------------------------
// Evaluation, generic over double and Jet.

struct ScalarOps {
  using value_type = double;
  static double fn_exp(double a) { return std::exp(a); }
  static double fn_sin(double a) { return std::sin(a); }
  static double fn_cos(double a) { return std::cos(a); }
  static double fn_sqrt(double a) {
    if (!(a > 0.0))
      fail(ErrorCode::invalid_argument,
           "sqrt requires a positive argument, got " + std::to_string(a));
    return std::sqrt(a);
  }
  static double fn_pow(double a, int n) {
    return std::pow(a, n);
  }
};

struct JetOps {
  using value_type = Jet;
  static Jet fn_exp(const Jet& a) { return exp(a); }
  static Jet fn_sin(const Jet& a) { return sin(a); }
  static Jet fn_cos(const Jet& a) { return cos(a); }
  static Jet fn_sqrt(const Jet& a) { return sqrt(a); }
  static Jet fn_pow(const Jet& a, int n) { return pow_int(a, n); }
};

template <class Ops, class T = typename Ops::value_type>
T eval_node(const std::vector<Node>& nodes, int idx, const T* vars,
            const T* consts) {
  const Node& n = nodes[idx];
  switch (n.kind) {
    case NodeKind::number:
      return consts[idx];
    case NodeKind::variable:
      return vars[n.var];
    case NodeKind::parameter:
      return consts[idx];
    case NodeKind::negate:
      return -eval_node<Ops>(nodes, n.a, vars, consts);
    case NodeKind::add:
      return eval_node<Ops>(nodes, n.a, vars, consts) +
             eval_node<Ops>(nodes, n.b, vars, consts);
    case NodeKind::sub:
      return eval_node<Ops>(nodes, n.a, vars, consts) -
             eval_node<Ops>(nodes, n.b, vars, consts);
    case NodeKind::mul:
      return eval_node<Ops>(nodes, n.a, vars, consts) *
             eval_node<Ops>(nodes, n.b, vars, consts);
    case NodeKind::div:
      return eval_node<Ops>(nodes, n.a, vars, consts) /
             eval_node<Ops>(nodes, n.b, vars, consts);
    case NodeKind::pow:
      return Ops::fn_pow(eval_node<Ops>(nodes, n.a, vars, consts),
                         n.ipow);
    case NodeKind::call: {
      T arg = eval_node<Ops>(nodes, n.a, vars, consts);
      switch (n.fn) {
        case Fn::fn_exp: return Ops::fn_exp(arg);
        case Fn::fn_sin: return Ops::fn_sin(arg);
        case Fn::fn_cos: return Ops::fn_cos(arg);
        case Fn::fn_sqrt: return Ops::fn_sqrt(arg);
      }
      break;
    }
  }
  fail(ErrorCode::internal, "corrupt expression node");
}

// Scalar evaluation with numbers/parameters folded into a per-node table.
double eval_scalar(const std::vector<Node>& nodes, int idx,
                   const std::array<double, 4>& vars,
                   const std::vector<double>& params) {
  const Node& n = nodes[idx];
  switch (n.kind) {
    case NodeKind::number: return n.number;
    case NodeKind::variable: return vars[n.var];
    case NodeKind::parameter: return params[n.param];
    case NodeKind::negate: return -eval_scalar(nodes, n.a, vars, params);
    case NodeKind::add:
      return eval_scalar(nodes, n.a, vars, params) +
             eval_scalar(nodes, n.b, vars, params);
    case NodeKind::sub:
      return eval_scalar(nodes, n.a, vars, params) -
             eval_scalar(nodes, n.b, vars, params);
    case NodeKind::mul:
      return eval_scalar(nodes, n.a, vars, params) *
             eval_scalar(nodes, n.b, vars, params);
    case NodeKind::div:
      return eval_scalar(nodes, n.a, vars, params) /
             eval_scalar(nodes, n.b, vars, params);
    case NodeKind::pow:
      return ScalarOps::fn_pow(eval_scalar(nodes, n.a, vars, params), n.ipow);
    case NodeKind::call: {
      double a = eval_scalar(nodes, n.a, vars, params);
      switch (n.fn) {
        case Fn::fn_exp: return ScalarOps::fn_exp(a);
        case Fn::fn_sin: return ScalarOps::fn_sin(a);
        case Fn::fn_cos: return ScalarOps::fn_cos(a);
        case Fn::fn_sqrt: return ScalarOps::fn_sqrt(a);
      }
      break;
    }
  }
  fail(ErrorCode::internal, "corrupt expression node");
}

//----------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Precedence bands: 0 additive, 1 multiplicative, 2 unary minus, 3 power.
void print_node(const std::vector<Node>& nodes,
                const std::vector<std::string>& names, int idx, int parent_prec,
                bool right_side, std::string& out) {
  const Node& n = nodes[idx];
  int prec;
  switch (n.kind) {
    case NodeKind::add:
    case NodeKind::sub: prec = 0; break;
    case NodeKind::mul:
    case NodeKind::div: prec = 1; break;
    case NodeKind::negate: prec = 2; break;
    case NodeKind::pow: prec = 3; break;
    default: prec = 4; break;
  }
  bool parens = prec < parent_prec ||
                (prec == parent_prec && right_side && parent_prec <= 1);
  if (parens) out += "(";
  switch (n.kind) {
    case NodeKind::number:
      if (n.number < 0) {
        out += "(" + format_number(n.number) + ")";
      } else {
        out += format_number(n.number);
      }
      break;
    case NodeKind::variable: out += kVarNames[n.var]; break;
    case NodeKind::parameter: out += names[n.param]; break;
    case NodeKind::negate:
      out += "-";
      print_node(nodes, names, n.a, 2, false, out);
      break;
    case NodeKind::add:
    case NodeKind::sub:
      print_node(nodes, names, n.a, 0, false, out);
      out += (n.kind == NodeKind::add) ? " + " : " - ";
      print_node(nodes, names, n.b, 0, true, out);
      break;
    case NodeKind::mul:
    case NodeKind::div:
      print_node(nodes, names, n.a, 1, false, out);
      out += (n.kind == NodeKind::mul) ? "*" : "/";
      print_node(nodes, names, n.b, 1, true, out);
      break;
    case NodeKind::pow:
      print_node(nodes, names, n.a, 4, false, out);
      out += "^";
      if (n.ipow < 0) {
        out += "-" + std::to_string(-n.ipow);
      } else {
        out += std::to_string(n.ipow);
      }
      break;
    case NodeKind::call:
      switch (n.fn) {
        case Fn::fn_exp: out += "exp("; break;
        case Fn::fn_sin: out += "sin("; break;
        case Fn::fn_cos: out += "cos("; break;
        case Fn::fn_sqrt: out += "sqrt("; break;
      }
      print_node(nodes, names, n.a, 0, false, out);
      out += ")";
      break;
  }
  if (parens) out += ")";
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

//----------------------------------------------------------------------------

Model::Model(std::shared_ptr<const Ast> ast, std::vector<double> values,
             std::vector<char> bound)
    : ast_(std::move(ast)), values_(std::move(values)), bound_(std::move(bound)) {}

Model Model::parse(std::string_view text) {
  auto ast = std::make_shared<Ast>();
  ast->source = trim(text);
  Parser parser(text, *ast);
  ast->root = parser.parse_expression();
  parser.expect_end();
  std::size_t np = ast->param_names.size();
  return Model(std::move(ast), std::vector<double>(np, 0.0),
               std::vector<char>(np, 0));
}

Model Model::parse_file_text(std::string_view text) {
  std::vector<std::pair<std::string, double>> params;
  std::string expression;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("param ", 0) == 0 || t == "param") {
      if (!expression.empty())
        fail(ErrorCode::parse_error,
             "model file line " + std::to_string(lineno) +
                 ": param line after the expression started");
      std::string rest = trim(t.substr(5));
      std::size_t eq = rest.find('=');
      if (eq == std::string::npos)
        fail(ErrorCode::parse_error,
             "model file line " + std::to_string(lineno) +
                 ": expected 'param NAME = VALUE'");
      std::string name = trim(rest.substr(0, eq));
      std::string valtext = trim(rest.substr(eq + 1));
      if (name.empty() || valtext.empty())
        fail(ErrorCode::parse_error,
             "model file line " + std::to_string(lineno) +
                 ": expected 'param NAME = VALUE'");
      char* endp = nullptr;
      double value = std::strtod(valtext.c_str(), &endp);
      if (endp != valtext.c_str() + valtext.size())
        fail(ErrorCode::parse_error,
             "model file line " + std::to_string(lineno) +
                 ": cannot parse parameter value '" + valtext + "'");
      params.emplace_back(name, value);
      continue;
    }
    if (!expression.empty()) expression += " ";
    expression += t;
  }
  if (expression.empty())
    fail(ErrorCode::parse_error, "model file contains no expression");
  Model m = parse(expression);
  for (const auto& [name, value] : params) m = m.bind(name, value);
  return m;
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::io_error, "cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_file_text(buf.str());
}

Model Model::builtin(std::string_view family) {
  if (family == "fold-canonical" || family == "fold") {
    Model m = parse("v + u*x + b*x^2 + c*x^3 + q*x^4 + H1*y^2");
    return m.bind("b", 0.0).bind("c", 1.0).bind("q", 0.0).bind("H1", 0.5);
  }
  if (family == "cusp-canonical" || family == "cusp") {
    Model m = parse("h0*u + u*x + (v/2)*x^2 + (a4/4)*x^4 + H1*y^2");
    return m.bind("h0", 1.0).bind("a4", 1.0).bind("H1", 0.5);
  }
  fail(ErrorCode::invalid_argument,
       "unknown builtin model family: " + std::string(family));
}

Model Model::bind(const std::string& name, double value) const {
  for (std::size_t i = 0; i < ast_->param_names.size(); ++i) {
    if (ast_->param_names[i] == name) {
      Model out = *this;
      out.values_[i] = value;
      out.bound_[i] = 1;
      return out;
    }
  }
  fail(ErrorCode::invalid_argument,
       "model has no parameter named '" + name + "'");
}

const std::string& Model::source() const { return ast_->source; }

std::string Model::print() const {
  std::string out;
  print_node(ast_->nodes, ast_->param_names, ast_->root, 0, false, out);
  return out;
}

std::vector<std::string> Model::parameter_names() const {
  return ast_->param_names;
}

std::vector<std::string> Model::unbound_parameters() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bound_.size(); ++i)
    if (!bound_[i]) out.push_back(ast_->param_names[i]);
  return out;
}

std::map<std::string, double> Model::parameters() const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < bound_.size(); ++i)
    if (bound_[i]) out[ast_->param_names[i]] = values_[i];
  return out;
}

std::uint64_t Model::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(h, ast_->source);
  for (std::size_t i = 0; i < bound_.size(); ++i) {
    if (!bound_[i]) continue;
    h = fnv1a(h, ast_->param_names[i]);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "=%.17g;", values_[i]);
    h = fnv1a(h, buf);
  }
  return h;
}

namespace {

void require_bound(const std::vector<char>& bound,
                   const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (!bound[i])
      fail(ErrorCode::unbound_parameter,
           "parameter '" + names[i] + "' is unbound");
  }
}

}  // namespace

double Model::eval(const std::array<double, 4>& p) const {
  require_bound(bound_, ast_->param_names);
  return eval_scalar(ast_->nodes, ast_->root, p, values_);
}

Jet Model::eval_jet(const std::array<double, 4>& p,
                    const std::array<bool, 4>& active, int degree) const {
  require_bound(bound_, ast_->param_names);
  int num_active = 0;
  for (bool a : active) num_active += a ? 1 : 0;
  if (num_active == 0)
    fail(ErrorCode::invalid_argument,
         "jet evaluation requires at least one active variable");

  std::vector<Jet> vars(4);
  int slot = 0;
  for (int k = 0; k < 4; ++k) {
    if (active[k]) {
      vars[k] = Jet::variable(slot++, p[k], num_active, degree);
    } else {
      vars[k] = Jet::constant(num_active, degree, p[k]);
    }
  }
  // Fold numbers and parameters into constant jets once per node.
  std::vector<Jet> consts(ast_->nodes.size());
  for (std::size_t i = 0; i < ast_->nodes.size(); ++i) {
    const Node& n = ast_->nodes[i];
    if (n.kind == NodeKind::number)
      consts[i] = Jet::constant(num_active, degree, n.number);
    else if (n.kind == NodeKind::parameter)
      consts[i] = Jet::constant(num_active, degree, values_[n.param]);
  }
  return eval_node<JetOps>(ast_->nodes, ast_->root, vars.data(), consts.data());
}

Jet Model::full_jet(const std::array<double, 4>& p, int degree) const {
  return eval_jet(p, {true, true, true, true}, degree);
}

}  // namespace slowfast
