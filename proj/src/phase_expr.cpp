#include "kakeya/phase_expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <cstring>
#include <optional>

namespace kakeya {

std::string to_string(Var v) {
  switch (v.kind) {
    case VarKind::X: return "x" + std::to_string(v.index + 1);
    case VarKind::T: return "t";
    case VarKind::Y: return "y" + std::to_string(v.index + 1);
  }
  return "?";
}

std::vector<Var> xt_vars(int dim) {
  std::vector<Var> out;
  for (int i = 0; i < dim - 1; ++i) out.push_back(var_x(i));
  out.push_back(var_t());
  return out;
}

std::vector<Var> y_vars(int dim) {
  std::vector<Var> out;
  for (int i = 0; i < dim - 1; ++i) out.push_back(var_y(i));
  return out;
}

// ---------------------------------------------------------------------------
// Number

namespace {

using i128 = __int128;

constexpr i128 kI64Max = std::numeric_limits<std::int64_t>::max();
constexpr i128 kI64Min = std::numeric_limits<std::int64_t>::min();

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

Number make_rational(i128 num, i128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kI64Max || num < kI64Min || den > kI64Max)
    return Number::from_double(static_cast<double>(num) / static_cast<double>(den));
  Number n;
  n.exact = true;
  n.num = static_cast<std::int64_t>(num);
  n.den = static_cast<std::int64_t>(den);
  return n;
}

}  // namespace

Number Number::rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidArgument("rational literal with zero denominator");
  return make_rational(num, den);
}

Number Number::from_double(double v) {
  Number n;
  n.exact = false;
  n.real = v;
  return n;
}

bool operator==(const Number& a, const Number& b) {
  if (a.exact != b.exact) return false;
  if (a.exact) return a.num == b.num && a.den == b.den;
  return std::memcmp(&a.real, &b.real, sizeof(double)) == 0;
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact && b.exact) return make_rational(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
  return Number::from_double(a.value() + b.value());
}

Number operator-(const Number& a, const Number& b) {
  if (a.exact && b.exact) return make_rational(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den);
  return Number::from_double(a.value() - b.value());
}

Number operator*(const Number& a, const Number& b) {
  if (a.exact && b.exact) return make_rational(i128(a.num) * b.num, i128(a.den) * b.den);
  return Number::from_double(a.value() * b.value());
}

Number operator/(const Number& a, const Number& b) {
  if (a.exact && b.exact) return make_rational(i128(a.num) * b.den, i128(a.den) * b.num);
  return Number::from_double(a.value() / b.value());
}

Number operator-(const Number& a) {
  if (a.exact) return make_rational(-i128(a.num), a.den);
  return Number::from_double(-a.real);
}

// ---------------------------------------------------------------------------
// Expr

struct Expr::Node {
  Op op = Op::Const;
  Number num;
  Var var;
  int exponent = 0;
  // null for leaves; a default Expr here would recurse into zero_node()
  Expr a{std::shared_ptr<const Node>()};
  Expr b{std::shared_ptr<const Node>()};
};

namespace {

const std::shared_ptr<const Expr::Node>& zero_node() {
  static const auto node = std::make_shared<const Expr::Node>();
  return node;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Expr make_node(Op op, Expr a, Expr b, int exponent) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->exponent = exponent;
  return Expr(std::move(n));
}

Expr Expr::constant(Number v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->num = v;
  return Expr(std::move(n));
}

Expr Expr::variable(Var v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = v;
  return Expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
const Number& Expr::number() const { return node_->num; }
Var Expr::var() const { return node_->var; }
int Expr::exponent() const { return node_->exponent; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const: return a.number() == b.number();
    case Op::Var: return a.var() == b.var();
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
    case Op::Pow: return a.exponent() == b.exponent() && structurally_equal(a.lhs(), b.lhs());
    default: return structurally_equal(a.lhs(), b.lhs());
  }
}

// ---------------------------------------------------------------------------
// Builders

namespace {

// c * e with c a constant literal and e not.
bool split_scaled(const Expr& e, Number& c, Expr& rest) {
  if (e.op() == Op::Mul && e.lhs().is_constant()) {
    c = e.lhs().number();
    rest = e.rhs();
    return true;
  }
  return false;
}

std::optional<double> apply_function(Op op, double v) {
  double r = 0.0;
  switch (op) {
    case Op::Sin: r = std::sin(v); break;
    case Op::Cos: r = std::cos(v); break;
    case Op::Exp: r = std::exp(v); break;
    case Op::Log:
      if (!(v > 0.0)) return std::nullopt;
      r = std::log(v);
      break;
    case Op::Sqrt:
      if (v < 0.0) return std::nullopt;
      r = std::sqrt(v);
      break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

Expr function_node(Op op, const Expr& a) {
  if (a.is_constant()) {
    if (auto v = apply_function(op, a.number().value())) {
      // exp(0) = 1 and friends stay exact
      if (*v == std::trunc(*v) && std::abs(*v) < 1e15 && a.number().exact && a.number().is_zero())
        return Expr::constant(Number::rational(static_cast<std::int64_t>(*v)));
      return Expr::constant(Number::from_double(*v));
    }
  }
  return make_node(op, a, Expr(), 0);
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.number() + b.number());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return make_node(Op::Add, a, b, 0);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.number() - b.number());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return make_node(Op::Sub, a, b, 0);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.number() * b.number());
  if (b.is_constant() && !a.is_constant()) return b * a;
  if (a.is_constant()) {
    if (a.is_zero()) return a;
    if (a.number().is_one()) return b;
    Number c;
    Expr rest;
    if (split_scaled(b, c, rest)) return Expr::constant(a.number() * c) * rest;
  }
  return make_node(Op::Mul, a, b, 0);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant() && !b.number().is_zero()) {
    if (a.is_constant()) return Expr::constant(a.number() / b.number());
    if (b.number().is_one()) return a;
    Number c;
    Expr rest;
    if (split_scaled(a, c, rest)) return Expr::constant(c / b.number()) * rest;
  }
  return make_node(Op::Div, a, b, 0);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.number());
  if (a.op() == Op::Neg) return a.lhs();
  return make_node(Op::Neg, a, Expr(), 0);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    const Number& b = base.number();
    if (!(b.is_zero() && exponent < 0)) {
      Number r = Number::rational(1);
      Number f = exponent > 0 ? b : Number::rational(1) / b;
      for (int i = 0; i < std::abs(exponent); ++i) r = r * f;
      if (r.exact || std::isfinite(r.real)) return Expr::constant(r);
    }
  }
  return make_node(Op::Pow, base, Expr(), exponent);
}

Expr sin(const Expr& a) { return function_node(Op::Sin, a); }
Expr cos(const Expr& a) { return function_node(Op::Cos, a); }
Expr exp(const Expr& a) { return function_node(Op::Exp, a); }
Expr log(const Expr& a) { return function_node(Op::Log, a); }
Expr sqrt(const Expr& a) { return function_node(Op::Sqrt, a); }

// ---------------------------------------------------------------------------
// Parser
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' intexp)?
//   intexp  := ['-'] integer | '(' ['-'] integer ')'
//   primary := number | ident | func '(' expr ')' | '(' expr ')'

namespace {

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+')) e = e + parse_term();
      else if (accept('-')) e = e - parse_term();
      else return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) {
        e = e * parse_unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = parse_unary();
        if (d.is_zero()) throw ParseError("division by literal zero", at);
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      bool paren = accept('(');
      bool negative = accept('-');
      skip_ws();
      std::size_t at = pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw ParseError("exponent must be an integer literal", at);
      std::int64_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        n = n * 10 + (src_[pos_++] - '0');
        if (n > 1000) throw ParseError("exponent too large", at);
      }
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
        throw ParseError("exponent must be an integer literal", at);
      if (paren) expect(')');
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '^') throw ParseError("chained exponents are not supported", pos_);
      return pow(base, static_cast<int>(negative ? -n : n));
    }
    return base;
  }

  Expr parse_number() {
    std::size_t start = pos_;
    bool decimal = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      decimal = true;
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        decimal = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    if (text == ".") throw ParseError("malformed number", start);
    if (decimal) return Expr::constant(Number::from_double(std::strtod(text.c_str(), nullptr)));
    if (text.size() > 18) return Expr::constant(Number::from_double(std::strtod(text.c_str(), nullptr)));
    return Expr::constant(Number::rational(std::stoll(text)));
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string id(src_.substr(start, pos_ - start));
      if (id == "sin" || id == "cos" || id == "exp" || id == "log" || id == "sqrt") {
        expect('(');
        Expr arg = parse_expr();
        expect(')');
        if (id == "sin") return sin(arg);
        if (id == "cos") return cos(arg);
        if (id == "exp") return exp(arg);
        if (id == "log") return log(arg);
        return sqrt(arg);
      }
      return Expr::variable(resolve(id, start));
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Var resolve(const std::string& id, std::size_t at) const {
    if (id == "t") return var_t();
    if ((id[0] == 'x' || id[0] == 'y') && id.size() > 1 &&
        std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      if (id.size() > 6) throw ParseError("variable index out of range in '" + id + "'", at);
      int k = std::stoi(id.substr(1));
      if (k < 1 || k > dim_ - 1)
        throw ParseError("variable index out of range in '" + id + "' (dimension " + std::to_string(dim_) +
                             " has " + std::to_string(dim_ - 1) + " coordinates)",
                         at);
      return id[0] == 'x' ? var_x(k - 1) : var_y(k - 1);
    }
    throw ParseError("unknown identifier '" + id + "'", at);
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_phase(std::string_view src, int dim) {
  if (dim < 2) throw InvalidArgument("dimension must be at least 2");
  return Parser(src, dim).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string print_number(const Number& n) {
  if (n.exact) {
    std::string s = std::to_string(n.num);
    if (n.den != 1) s += "/" + std::to_string(n.den);
    return (n.num < 0 || n.den != 1) ? "(" + s + ")" : s;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", n.real);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return n.real < 0 || std::signbit(n.real) ? "(" + s + ")" : s;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    default: return "?";
  }
}

void print_into(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const: out += print_number(e.number()); return;
    case Op::Var: out += to_string(e.var()); return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      static constexpr char kSym[] = {'+', '-', '*', '/'};
      out += '(';
      print_into(e.lhs(), out);
      out += ' ';
      out += kSym[static_cast<int>(e.op()) - static_cast<int>(Op::Add)];
      out += ' ';
      print_into(e.rhs(), out);
      out += ')';
      return;
    }
    case Op::Neg:
      out += "(-";
      print_into(e.lhs(), out);
      out += ')';
      return;
    case Op::Pow:
      out += '(';
      print_into(e.lhs(), out);
      out += ")^";
      out += e.exponent() < 0 ? "(" + std::to_string(e.exponent()) + ")" : std::to_string(e.exponent());
      return;
    default:
      out += function_name(e.op());
      out += '(';
      print_into(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  // A bare variable or literal needs no outer parentheses; strip the ones
  // around a top-level binary node for readability.
  if (out.size() > 2 && out.front() == '(' && out.back() == ')' &&
      (e.op() == Op::Add || e.op() == Op::Sub || e.op() == Op::Mul || e.op() == Op::Div))
    return out.substr(1, out.size() - 2);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, Var v) {
  switch (e.op()) {
    case Op::Const: return Expr::constant(0);
    case Op::Var: return Expr::constant(e.var() == v ? 1 : 0);
    case Op::Add: return differentiate(e.lhs(), v) + differentiate(e.rhs(), v);
    case Op::Sub: return differentiate(e.lhs(), v) - differentiate(e.rhs(), v);
    case Op::Neg: return -differentiate(e.lhs(), v);
    case Op::Mul:
      return differentiate(e.lhs(), v) * e.rhs() + e.lhs() * differentiate(e.rhs(), v);
    case Op::Div: {
      Expr da = differentiate(e.lhs(), v);
      if (e.rhs().is_constant()) return da / e.rhs();
      Expr db = differentiate(e.rhs(), v);
      if (db.is_zero()) return da / e.rhs();
      return (da * e.rhs() - e.lhs() * db) / pow(e.rhs(), 2);
    }
    case Op::Pow: {
      int n = e.exponent();
      return Expr::constant(n) * pow(e.lhs(), n - 1) * differentiate(e.lhs(), v);
    }
    case Op::Sin: return cos(e.lhs()) * differentiate(e.lhs(), v);
    case Op::Cos: return -(sin(e.lhs()) * differentiate(e.lhs(), v));
    case Op::Exp: return e * differentiate(e.lhs(), v);
    case Op::Log: return differentiate(e.lhs(), v) / e.lhs();
    case Op::Sqrt: return differentiate(e.lhs(), v) / (Expr::constant(2) * e);
  }
  return Expr::constant(0);
}

// ---------------------------------------------------------------------------
// Evaluation

PhasePoint PhasePoint::zero(int dim) {
  return PhasePoint(Eigen::VectorXd::Zero(dim - 1), 0.0, Eigen::VectorXd::Zero(dim - 1));
}

Eigen::VectorXd PhasePoint::xt() const {
  Eigen::VectorXd z(x.size() + 1);
  z.head(x.size()) = x;
  z(x.size()) = t;
  return z;
}

void PhasePoint::set_xt(const Eigen::VectorXd& z) {
  x = z.head(z.size() - 1);
  t = z(z.size() - 1);
}

double PhasePoint::operator[](Var v) const {
  switch (v.kind) {
    case VarKind::X: return x(v.index);
    case VarKind::T: return t;
    case VarKind::Y: return y(v.index);
  }
  return 0.0;
}

double& PhasePoint::operator[](Var v) {
  switch (v.kind) {
    case VarKind::X: return x(v.index);
    case VarKind::Y: return y(v.index);
    default: return t;
  }
}

namespace {

[[noreturn]] void domain_failure(const char* what, const Expr& e) {
  throw DomainError(std::string(what) + " in subexpression " + print(e));
}

double eval_rec(const Expr& e, const PhasePoint& pt) {
  switch (e.op()) {
    case Op::Const: return e.number().value();
    case Op::Var: {
      Var v = e.var();
      if (v.kind == VarKind::X && v.index >= pt.x.size()) throw InvalidArgument("assignment misses " + to_string(v));
      if (v.kind == VarKind::Y && v.index >= pt.y.size()) throw InvalidArgument("assignment misses " + to_string(v));
      return pt[v];
    }
    case Op::Add: return eval_rec(e.lhs(), pt) + eval_rec(e.rhs(), pt);
    case Op::Sub: return eval_rec(e.lhs(), pt) - eval_rec(e.rhs(), pt);
    case Op::Mul: return eval_rec(e.lhs(), pt) * eval_rec(e.rhs(), pt);
    case Op::Div: {
      double den = eval_rec(e.rhs(), pt);
      if (den == 0.0) domain_failure("division by zero", e);
      return eval_rec(e.lhs(), pt) / den;
    }
    case Op::Neg: return -eval_rec(e.lhs(), pt);
    case Op::Pow: {
      double b = eval_rec(e.lhs(), pt);
      int n = e.exponent();
      if (b == 0.0 && n < 0) domain_failure("zero raised to a negative power", e);
      // repeated squaring keeps integer powers exact for small bases
      double r = 1.0, f = n < 0 ? 1.0 / b : b;
      for (unsigned k = static_cast<unsigned>(std::abs(n)); k; k >>= 1) {
        if (k & 1u) r *= f;
        f *= f;
      }
      return r;
    }
    case Op::Sin: return std::sin(eval_rec(e.lhs(), pt));
    case Op::Cos: return std::cos(eval_rec(e.lhs(), pt));
    case Op::Exp: return std::exp(eval_rec(e.lhs(), pt));
    case Op::Log: {
      double a = eval_rec(e.lhs(), pt);
      if (!(a > 0.0)) domain_failure("log of nonpositive value", e);
      return std::log(a);
    }
    case Op::Sqrt: {
      double a = eval_rec(e.lhs(), pt);
      if (a < 0.0) domain_failure("sqrt of negative value", e);
      return std::sqrt(a);
    }
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, const PhasePoint& pt) {
  double v = eval_rec(e, pt);
  if (!std::isfinite(v)) throw DomainError("non-finite value of " + print(e));
  return v;
}

// ---------------------------------------------------------------------------
// PhaseFunction

PhaseFunction::PhaseFunction(int dim, Expr expr, double epsilon0)
    : dim_(dim), expr_(std::move(expr)), epsilon0_(epsilon0), source_(print(expr_)) {
  if (dim < 2) throw InvalidArgument("phase dimension must be at least 2");
  if (!(epsilon0 > 0.0)) throw InvalidArgument("epsilon0 must be positive");
}

PhaseFunction::PhaseFunction(const PhaseFunction& other)
    : dim_(other.dim_), expr_(other.expr_), epsilon0_(other.epsilon0_), source_(other.source_) {
  std::lock_guard lock(other.cache_mutex_);
  cache_ = other.cache_;
}

PhaseFunction& PhaseFunction::operator=(const PhaseFunction& other) {
  if (this == &other) return *this;
  std::map<MultiIndex, Expr> cache;
  {
    std::lock_guard lock(other.cache_mutex_);
    cache = other.cache_;
  }
  std::lock_guard lock(cache_mutex_);
  dim_ = other.dim_;
  expr_ = other.expr_;
  epsilon0_ = other.epsilon0_;
  source_ = other.source_;
  cache_ = std::move(cache);
  return *this;
}

PhaseFunction PhaseFunction::parse(std::string_view src, int dim, double epsilon0) {
  PhaseFunction phi(dim, parse_phase(src, dim), epsilon0);
  phi.source_ = std::string(src);
  return phi;
}

Expr PhaseFunction::derivative(MultiIndex index) const {
  if (static_cast<int>(index.size()) > kMaxDerivativeOrder)
    throw InvalidArgument("derivative order " + std::to_string(index.size()) + " exceeds the cached maximum of " +
                          std::to_string(kMaxDerivativeOrder));
  for (Var v : index) {
    int limit = v.kind == VarKind::T ? 1 : dim_ - 1;
    if (v.index < 0 || v.index >= limit) throw InvalidArgument("variable " + to_string(v) + " out of range");
  }
  if (index.empty()) return expr_;
  std::sort(index.begin(), index.end());
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(index); it != cache_.end()) return it->second;
  }
  // Build from the cached parent so every prefix is memoized too. Two threads
  // may race to fill the same entry; both produce the same tree.
  MultiIndex parent(index.begin(), index.end() - 1);
  Expr d = differentiate(derivative(parent), index.back());
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(std::move(index), std::move(d)).first->second;
}

double PhaseFunction::partial(MultiIndex index, const PhasePoint& pt) const {
  return eval(derivative(std::move(index)), pt);
}

Eigen::MatrixXd PhaseFunction::partial_matrix(std::span<const Var> rows, std::span<const Var> cols,
                                              std::span<const Var> extra, const PhasePoint& pt) const {
  Eigen::MatrixXd m(rows.size(), cols.size());
  MultiIndex idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      idx.assign(extra.begin(), extra.end());
      idx.push_back(rows[i]);
      idx.push_back(cols[j]);
      m(i, j) = partial(idx, pt);
    }
  }
  return m;
}

Eigen::VectorXd PhaseFunction::partial_vector(std::span<const Var> vars, std::span<const Var> extra,
                                              const PhasePoint& pt) const {
  Eigen::VectorXd v(vars.size());
  MultiIndex idx;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    idx.assign(extra.begin(), extra.end());
    idx.push_back(vars[i]);
    v(i) = partial(idx, pt);
  }
  return v;
}

std::size_t PhaseFunction::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

Eigen::VectorXd deriv_tensor(const PhaseFunction& phi, std::span<const MultiIndex> spec, const PhasePoint& pt) {
  Eigen::VectorXd out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out(i) = phi.partial(spec[i], pt);
  return out;
}

Eigen::VectorXd grad_y(const PhaseFunction& phi, const PhasePoint& pt) {
  auto ys = y_vars(phi.dim());
  return phi.partial_vector(ys, {}, pt);
}

Eigen::MatrixXd hessian_y(const PhaseFunction& phi, const PhasePoint& pt, std::span<const Var> extra) {
  auto ys = y_vars(phi.dim());
  return phi.partial_matrix(ys, ys, extra, pt);
}

Eigen::MatrixXd mixed_xt_y(const PhaseFunction& phi, const PhasePoint& pt) {
  return phi.partial_matrix(xt_vars(phi.dim()), y_vars(phi.dim()), {}, pt);
}

}  // namespace kakeya
