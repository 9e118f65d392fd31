#include "stathyp/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "stathyp/error.hpp"

namespace stathyp {

namespace {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

bool is_number(const Expr& e, double v) { return e.op() == Expr::Op::Num && e.value() == v; }

// Folding constructors used only while building derivative trees.
Expr add(Expr a, Expr b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  if (a.op() == Expr::Op::Num && b.op() == Expr::Op::Num) return Expr::number(a.value() + b.value());
  return Expr::binary(Expr::Op::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (is_number(b, 0.0)) return a;
  if (is_number(a, 0.0)) return Expr::unary(Expr::Op::Neg, std::move(b));
  if (a.op() == Expr::Op::Num && b.op() == Expr::Op::Num) return Expr::number(a.value() - b.value());
  return Expr::binary(Expr::Op::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return Expr::number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  if (a.op() == Expr::Op::Num && b.op() == Expr::Op::Num) return Expr::number(a.value() * b.value());
  return Expr::binary(Expr::Op::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
  if (is_number(a, 0.0)) return Expr::number(0.0);
  if (is_number(b, 1.0)) return a;
  return Expr::binary(Expr::Op::Div, std::move(a), std::move(b));
}

Expr neg(Expr a) {
  if (a.op() == Expr::Op::Num) return Expr::number(-a.value());
  return Expr::unary(Expr::Op::Neg, std::move(a));
}

int precedence(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add:
    case Expr::Op::Sub: return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div: return 2;
    case Expr::Op::Neg: return 3;
    case Expr::Op::Pow: return 4;
    default: return 5;
  }
}

const char* function_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Exp: return "exp";
    case Expr::Op::Ln: return "ln";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Cos: return "cos";
    default: return nullptr;
  }
}

char binary_symbol(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add: return '+';
    case Expr::Op::Sub: return '-';
    case Expr::Op::Mul: return '*';
    case Expr::Op::Div: return '/';
    case Expr::Op::Pow: return '^';
    default: return '?';
  }
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t n_vars) : text_(text), n_vars_(n_vars) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail(ErrorKind::Syntax, std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& what) const {
    throw Error(kind, what + " at column " + std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Op::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Op::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Expr::Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::binary(Expr::Op::Pow, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail(ErrorKind::Syntax, "unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!accept(')')) fail(ErrorKind::Syntax, "expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(ErrorKind::Syntax, std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail(ErrorKind::Syntax, "malformed number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (pos_ == start) fail(ErrorKind::Syntax, "malformed number");
    return Expr::number(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      std::size_t idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx < 1 || idx > n_vars_) {
        pos_ = start;
        fail(ErrorKind::UnknownIdentifier, "variable '" + std::string(name) + "' outside x1..x" + std::to_string(n_vars_));
      }
      return Expr::variable(idx - 1);
    }

    Expr::Op op;
    if (name == "exp") {
      op = Expr::Op::Exp;
    } else if (name == "ln") {
      op = Expr::Op::Ln;
    } else if (name == "sin") {
      op = Expr::Op::Sin;
    } else if (name == "cos") {
      op = Expr::Op::Cos;
    } else {
      pos_ = start;
      fail(ErrorKind::UnknownIdentifier, "unknown identifier '" + std::string(name) + "'");
    }
    if (!accept('(')) fail(ErrorKind::Syntax, "expected '(' after " + std::string(name));
    Expr arg = parse_sum();
    if (!accept(')')) fail(ErrorKind::Syntax, "expected ')'");
    return Expr::unary(op, std::move(arg));
  }

  std::string_view text_;
  std::size_t n_vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::number(double value) {
  return Expr(std::make_shared<const Node>(Node{Op::Num, value, 0, {}, {}}));
}

Expr Expr::variable(std::size_t index) {
  return Expr(std::make_shared<const Node>(Node{Op::Var, 0.0, index, {}, {}}));
}

Expr Expr::unary(Op op, Expr arg) {
  return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, std::move(arg), {}}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const Node>(Node{op, 0.0, 0, std::move(lhs), std::move(rhs)}));
}

Expr::Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
std::size_t Expr::index() const { return node_->index; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

double Expr::eval(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return x[n.index];
    case Op::Neg: return -n.a.eval(x);
    case Op::Add: return n.a.eval(x) + n.b.eval(x);
    case Op::Sub: return n.a.eval(x) - n.b.eval(x);
    case Op::Mul: return n.a.eval(x) * n.b.eval(x);
    case Op::Div: return n.a.eval(x) / n.b.eval(x);
    case Op::Pow: return std::pow(n.a.eval(x), n.b.eval(x));
    case Op::Exp: return std::exp(n.a.eval(x));
    case Op::Ln: return std::log(n.a.eval(x));
    case Op::Sin: return std::sin(n.a.eval(x));
    case Op::Cos: return std::cos(n.a.eval(x));
  }
  return 0.0;
}

Expr Expr::derivative(std::size_t var) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Num: return number(0.0);
    case Op::Var: return number(n.index == var ? 1.0 : 0.0);
    case Op::Neg: return neg(n.a.derivative(var));
    case Op::Add: return add(n.a.derivative(var), n.b.derivative(var));
    case Op::Sub: return sub(n.a.derivative(var), n.b.derivative(var));
    case Op::Mul:
      return add(mul(n.a.derivative(var), n.b), mul(n.a, n.b.derivative(var)));
    case Op::Div: {
      // (u/v)' = u'/v - u v' / v^2
      Expr du = n.a.derivative(var);
      Expr dv = n.b.derivative(var);
      return sub(div(du, n.b), div(mul(n.a, dv), mul(n.b, n.b)));
    }
    case Op::Pow: {
      Expr du = n.a.derivative(var);
      Expr dv = n.b.derivative(var);
      if (is_number(dv, 0.0)) {
        // constant exponent: c u^(c-1) u'; avoids ln(u) for negative bases
        return mul(mul(n.b, binary(Op::Pow, n.a, sub(n.b, number(1.0)))), du);
      }
      // u^v (v' ln u + v u' / u)
      return mul(*this, add(mul(dv, unary(Op::Ln, n.a)), div(mul(n.b, du), n.a)));
    }
    case Op::Exp: return mul(*this, n.a.derivative(var));
    case Op::Ln: return div(n.a.derivative(var), n.a);
    case Op::Sin: return mul(unary(Op::Cos, n.a), n.a.derivative(var));
    case Op::Cos: return neg(mul(unary(Op::Sin, n.a), n.a.derivative(var)));
  }
  return number(0.0);
}

std::size_t Expr::arity() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Num: return 0;
    case Op::Var: return n.index + 1;
    default: {
      std::size_t k = n.a.arity();
      if (!n.b.empty()) k = std::max(k, n.b.arity());
      return k;
    }
  }
}

std::string Expr::canonical() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Num: return format_number(n.value);
    case Op::Var: return "x" + std::to_string(n.index + 1);
    case Op::Neg: return "(-" + n.a.canonical() + ")";
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos: return std::string(function_name(n.op)) + "(" + n.a.canonical() + ")";
    default:
      return "(" + n.a.canonical() + binary_symbol(n.op) + n.b.canonical() + ")";
  }
}

std::string Expr::str() const {
  const Node& n = *node_;
  auto wrap = [](const Expr& child, int min_prec) {
    std::string s = child.str();
    if (precedence(child.op()) < min_prec) return "(" + s + ")";
    return s;
  };
  switch (n.op) {
    case Op::Num: {
      std::string s = format_number(n.value);
      return n.value < 0 ? "(" + s + ")" : s;
    }
    case Op::Var: return "x" + std::to_string(n.index + 1);
    case Op::Neg: return "-" + wrap(n.a, 4);
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos: return std::string(function_name(n.op)) + "(" + n.a.str() + ")";
    case Op::Add: return wrap(n.a, 1) + " + " + wrap(n.b, 2);
    case Op::Sub: return wrap(n.a, 1) + " - " + wrap(n.b, 2);
    case Op::Mul: return wrap(n.a, 2) + "*" + wrap(n.b, 3);
    case Op::Div: return wrap(n.a, 2) + "/" + wrap(n.b, 3);
    case Op::Pow: return wrap(n.a, 5) + "^" + wrap(n.b, 4);
    default: return canonical();
  }
}

Expr parse_expression(std::string_view text, std::size_t n_vars) {
  return Parser(text, n_vars).parse();
}

bool syntactically_equal(const Expr& a, const Expr& b) { return a.canonical() == b.canonical(); }

}  // namespace stathyp
