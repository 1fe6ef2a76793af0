#pragma once

// Expression language for phase functions phi(x, t; y).
//
// Variables are x1..x(d-1), t, y1..y(d-1). Literals are exact rationals
// (integers and integer/integer quotients) or binary doubles (decimal
// literals). Supported operators: + - * / and ^ with an integer exponent;
// functions sin, cos, exp, log, sqrt.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/errors.hpp"

namespace kakeya {

enum class VarKind : std::uint8_t { X = 0, T = 1, Y = 2 };

struct Var {
  VarKind kind = VarKind::T;
  int index = 0;  // 0-based; always 0 for t

  friend auto operator<=>(const Var&, const Var&) = default;
};

inline Var var_x(int i) { return {VarKind::X, i}; }
inline Var var_t() { return {VarKind::T, 0}; }
inline Var var_y(int i) { return {VarKind::Y, i}; }

std::string to_string(Var v);

/// x1..x(d-1), t
std::vector<Var> xt_vars(int dim);
/// y1..y(d-1)
std::vector<Var> y_vars(int dim);

/// Exact rational when `exact`, otherwise a binary double.
struct Number {
  bool exact = true;
  std::int64_t num = 0;
  std::int64_t den = 1;
  double real = 0.0;

  static Number rational(std::int64_t num, std::int64_t den = 1);
  static Number from_double(double v);

  double value() const { return exact ? static_cast<double>(num) / static_cast<double>(den) : real; }
  bool is_zero() const { return exact ? num == 0 : real == 0.0; }
  bool is_one() const { return exact ? (num == 1 && den == 1) : real == 1.0; }

  friend bool operator==(const Number& a, const Number& b);
};

Number operator+(const Number& a, const Number& b);
Number operator-(const Number& a, const Number& b);
Number operator*(const Number& a, const Number& b);
Number operator/(const Number& a, const Number& b);  // b must be nonzero
Number operator-(const Number& a);

enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt };

/// Immutable expression tree with shared structure.
class Expr {
 public:
  struct Node;

  Expr();  // constant 0

  static Expr constant(Number n);
  static Expr constant(std::int64_t n) { return constant(Number::rational(n)); }
  static Expr variable(Var v);

  Op op() const;
  const Number& number() const;  // Op::Const only
  Var var() const;               // Op::Var only
  int exponent() const;          // Op::Pow only
  const Expr& lhs() const;       // first operand (also the single argument of unary nodes)
  const Expr& rhs() const;

  bool is_constant() const { return op() == Op::Const; }
  bool is_zero() const { return is_constant() && number().is_zero(); }

  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Op, Expr, Expr, int);
  std::shared_ptr<const Node> node_;
};

// Builders. Each folds literal subtrees and the 0/1 identities; no other
// rewriting is done.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);

/// Parses `src` for ambient dimension `dim` (>= 2). Throws ParseError.
Expr parse_phase(std::string_view src, int dim);

/// Fully parenthesized text form; parse_phase(print(e)) is structurally equal to e.
std::string print(const Expr& e);

Expr differentiate(const Expr& e, Var v);

/// Point (x, t; y) of the phase domain.
struct PhasePoint {
  Eigen::VectorXd x;
  double t = 0.0;
  Eigen::VectorXd y;

  PhasePoint() = default;
  PhasePoint(Eigen::VectorXd x_, double t_, Eigen::VectorXd y_)
      : x(std::move(x_)), t(t_), y(std::move(y_)) {}
  static PhasePoint zero(int dim);

  /// (x, t) as one vector of length d.
  Eigen::VectorXd xt() const;
  void set_xt(const Eigen::VectorXd& z);
  double operator[](Var v) const;
  double& operator[](Var v);
};

/// Throws DomainError naming the offending subexpression when the value is
/// undefined or non-finite.
double eval(const Expr& e, const PhasePoint& pt);

/// Highest total derivative order kept in the cache.
inline constexpr int kMaxDerivativeOrder = 4;

using MultiIndex = std::vector<Var>;

/// A phase phi(x, t; y) on B^{d-1} x B^1 x B^{d-1} of radius epsilon0.
///
/// Derivatives are computed symbolically on first use and memoized under the
/// sorted multi-index, so mixed partials taken in any order share one entry.
/// The object is safe for concurrent reads.
class PhaseFunction {
 public:
  PhaseFunction(int dim, Expr expr, double epsilon0 = 0.25);
  PhaseFunction(const PhaseFunction& other);
  PhaseFunction& operator=(const PhaseFunction& other);

  static PhaseFunction parse(std::string_view src, int dim, double epsilon0 = 0.25);

  int dim() const { return dim_; }
  double epsilon0() const { return epsilon0_; }
  const Expr& expr() const { return expr_; }
  const std::string& source() const { return source_; }

  /// Symbolic derivative for the multi-index (any order of entries).
  /// Rejects total order above kMaxDerivativeOrder.
  Expr derivative(MultiIndex index) const;

  double operator()(const PhasePoint& pt) const { return eval(expr_, pt); }
  double partial(MultiIndex index, const PhasePoint& pt) const;

  /// Entry (i, j) = d/d rows[i] d/d cols[j] d/d extra... phi at pt.
  Eigen::MatrixXd partial_matrix(std::span<const Var> rows, std::span<const Var> cols,
                                 std::span<const Var> extra, const PhasePoint& pt) const;
  /// Entry i = d/d vars[i] d/d extra... phi at pt.
  Eigen::VectorXd partial_vector(std::span<const Var> vars, std::span<const Var> extra,
                                 const PhasePoint& pt) const;

  std::size_t cache_size() const;

 private:
  int dim_;
  Expr expr_;
  double epsilon0_;
  std::string source_;
  mutable std::mutex cache_mutex_;
  mutable std::map<MultiIndex, Expr> cache_;
};

/// Values of the requested partial derivatives at pt, one per multi-index.
Eigen::VectorXd deriv_tensor(const PhaseFunction& phi, std::span<const MultiIndex> spec,
                             const PhasePoint& pt);

// Common blocks.
Eigen::VectorXd grad_y(const PhaseFunction& phi, const PhasePoint& pt);
Eigen::MatrixXd hessian_y(const PhaseFunction& phi, const PhasePoint& pt,
                          std::span<const Var> extra = {});
/// d x (d-1) matrix of d/d(x,t)_i d/dy_j phi.
Eigen::MatrixXd mixed_xt_y(const PhaseFunction& phi, const PhasePoint& pt);

}  // namespace kakeya
