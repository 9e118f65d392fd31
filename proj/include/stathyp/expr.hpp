#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace stathyp {

// Immutable expression tree over variables x1..xn. Nodes are shared, so
// copying an Expr is cheap and derivative trees reuse subtrees of the input.
class Expr {
 public:
  enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Ln, Sin, Cos };

  struct Node;

  Expr() = default;

  static Expr number(double value);
  static Expr variable(std::size_t index);  // zero-based: x1 -> 0
  static Expr unary(Op op, Expr arg);
  static Expr binary(Op op, Expr lhs, Expr rhs);

  bool empty() const noexcept { return node_ == nullptr; }
  Op op() const;
  double value() const;        // Num only
  std::size_t index() const;   // Var only
  const Expr& lhs() const;     // unary argument or left operand
  const Expr& rhs() const;

  double eval(std::span<const double> x) const;
  Expr derivative(std::size_t var) const;

  // Largest variable index referenced plus one (0 for constant trees).
  std::size_t arity() const;

  // Fully parenthesized form with shortest round-trip numbers; two trees
  // are syntactically identical iff their canonical strings match.
  std::string canonical() const;
  std::string str() const;  // readable form, minimal parentheses

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Op op;
  double value = 0.0;
  std::size_t index = 0;
  Expr a;
  Expr b;
};

// Parses the model expression grammar: numbers, x1..xn, + - * / ^, unary
// minus, parentheses, exp/ln/sin/cos. '^' is right-associative and binds
// tighter than unary minus. Throws Error{Syntax|UnknownIdentifier} with the
// 1-based column of the offending token.
Expr parse_expression(std::string_view text, std::size_t n_vars);

bool syntactically_equal(const Expr& a, const Expr& b);

}  // namespace stathyp
