#ifndef ETV_EXPR_HPP
#define ETV_EXPR_HPP

// Immutable scalar expression trees over a fixed coordinate list.
// Nodes are shared and never mutated after construction, so copies are O(1)
// and evaluation/differentiation are safe to call concurrently.

#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etv/errors.hpp"

namespace etv {

enum class ExprKind { Number, ConstPi, ConstE, Coord, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;      // Number
  int coord = -1;          // Coord: index into the coordinate list
  std::string name;        // Coord: coordinate name (used for printing)
  Func fn = Func::Sin;     // Call
  ExprPtr a, b;            // operands (b unused for unary kinds)
};

namespace detail {

inline ExprPtr mk_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

inline ExprPtr mk_num(double v) {
  ExprNode n;
  n.kind = ExprKind::Number;
  n.value = v;
  return mk_node(std::move(n));
}

inline bool is_num(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Number && e->value == v;
}

inline bool is_num(const ExprPtr& e) { return e->kind == ExprKind::Number; }

// Structural equality. Pointer identity shortcut first; shared subtrees from
// differentiation make that path common.
inline bool struct_eq(const ExprPtr& x, const ExprPtr& y) {
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprKind::Number: return x->value == y->value;
    case ExprKind::ConstPi:
    case ExprKind::ConstE: return true;
    case ExprKind::Coord: return x->coord == y->coord;
    case ExprKind::Neg: return struct_eq(x->a, y->a);
    case ExprKind::Call: return x->fn == y->fn && struct_eq(x->a, y->a);
    default: return struct_eq(x->a, y->a) && struct_eq(x->b, y->b);
  }
}

inline double call_value(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Tan: return std::tan(x);
    case Func::Sinh: return std::sinh(x);
    case Func::Cosh: return std::cosh(x);
    case Func::Tanh: return std::tanh(x);
    case Func::Exp: return std::exp(x);
    case Func::Log:
      if (x < 0.0) throw DomainError("log of negative value");
      return std::log(x);
    case Func::Sqrt:
      if (x < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(x);
  }
  return 0.0;  // unreachable
}

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Tanh: return "tanh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

ExprPtr mk_neg(const ExprPtr& x);

// Smart constructors: fold numeric operands and apply 0/1 identities so that
// repeated differentiation does not blow up structurally. They never change
// the value of the expression at any point of its domain.
inline ExprPtr mk_add(const ExprPtr& x, const ExprPtr& y) {
  if (is_num(x, 0.0)) return y;
  if (is_num(y, 0.0)) return x;
  if (is_num(x) && is_num(y)) return mk_num(x->value + y->value);
  ExprNode n;
  n.kind = ExprKind::Add;
  n.a = x;
  n.b = y;
  return mk_node(std::move(n));
}

inline ExprPtr mk_sub(const ExprPtr& x, const ExprPtr& y) {
  if (is_num(y, 0.0)) return x;
  if (is_num(x) && is_num(y)) return mk_num(x->value - y->value);
  if (is_num(x, 0.0)) return mk_neg(y);
  if (x == y) return mk_num(0.0);
  ExprNode n;
  n.kind = ExprKind::Sub;
  n.a = x;
  n.b = y;
  return mk_node(std::move(n));
}

inline ExprPtr mk_pow(const ExprPtr& x, const ExprPtr& y);

inline ExprPtr mk_mul(const ExprPtr& x, const ExprPtr& y) {
  if (is_num(x, 0.0) || is_num(y, 0.0)) return mk_num(0.0);
  if (is_num(x, 1.0)) return y;
  if (is_num(y, 1.0)) return x;
  if (is_num(x) && is_num(y)) return mk_num(x->value * y->value);
  // Merge like powers with numeric exponents: p^a * p^b -> p^(a+b).
  auto base = [](const ExprPtr& e) -> const ExprPtr& {
    return e->kind == ExprKind::Pow && is_num(e->b) ? e->a : e;
  };
  auto expo = [](const ExprPtr& e) -> double {
    return e->kind == ExprKind::Pow && is_num(e->b) ? e->b->value : 1.0;
  };
  const ExprPtr& bx = base(x);
  const ExprPtr& by = base(y);
  if ((x->kind == ExprKind::Pow || y->kind == ExprKind::Pow) && struct_eq(bx, by))
    return mk_pow(bx, mk_num(expo(x) + expo(y)));
  ExprNode n;
  n.kind = ExprKind::Mul;
  n.a = x;
  n.b = y;
  return mk_node(std::move(n));
}

inline ExprPtr mk_div(const ExprPtr& x, const ExprPtr& y) {
  if (is_num(y, 1.0)) return x;
  if (is_num(x, 0.0) && is_num(y) && y->value != 0.0) return mk_num(0.0);
  if (is_num(x) && is_num(y) && y->value != 0.0) return mk_num(x->value / y->value);
  ExprNode n;
  n.kind = ExprKind::Div;
  n.a = x;
  n.b = y;
  return mk_node(std::move(n));
}

inline ExprPtr mk_pow(const ExprPtr& x, const ExprPtr& y) {
  if (is_num(y, 1.0)) return x;
  if (is_num(y, 0.0)) return mk_num(1.0);  // pow(x,0) == 1, matching std::pow(0,0)
  if (is_num(x, 1.0)) return mk_num(1.0);
  if (is_num(x) && is_num(y)) {
    double v = std::pow(x->value, y->value);
    if (std::isfinite(v)) return mk_num(v);
  }
  ExprNode n;
  n.kind = ExprKind::Pow;
  n.a = x;
  n.b = y;
  return mk_node(std::move(n));
}

inline ExprPtr mk_neg(const ExprPtr& x) {
  if (x->kind == ExprKind::Neg) return x->a;
  if (is_num(x)) return mk_num(-x->value);
  ExprNode n;
  n.kind = ExprKind::Neg;
  n.a = x;
  return mk_node(std::move(n));
}

inline ExprPtr mk_call(Func f, const ExprPtr& x) {
  if (is_num(x)) {
    bool safe = true;
    if ((f == Func::Log || f == Func::Sqrt) && x->value < 0.0) safe = false;
    if (safe) {
      double v = call_value(f, x->value);
      if (std::isfinite(v)) return mk_num(v);
    }
  }
  ExprNode n;
  n.kind = ExprKind::Call;
  n.fn = f;
  n.a = x;
  return mk_node(std::move(n));
}

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

class Expr {
 public:
  Expr() : node_(detail::mk_num(0.0)) {}
  explicit Expr(ExprPtr n) : node_(std::move(n)) {}

  static Expr number(double v) { return Expr(detail::mk_num(v)); }
  static Expr pi() {
    ExprNode n;
    n.kind = ExprKind::ConstPi;
    return Expr(detail::mk_node(std::move(n)));
  }
  static Expr euler() {
    ExprNode n;
    n.kind = ExprKind::ConstE;
    return Expr(detail::mk_node(std::move(n)));
  }
  static Expr coord(int index, std::string name) {
    ExprNode n;
    n.kind = ExprKind::Coord;
    n.coord = index;
    n.name = std::move(name);
    return Expr(detail::mk_node(std::move(n)));
  }

  const ExprPtr& node() const { return node_; }

  double eval(std::span<const double> x) const { return eval_node(node_.get(), x); }

  Expr diff(int coord_index) const { return Expr(diff_node(node_, coord_index)); }

  Expr simplified() const { return Expr(simplify_node(node_)); }

  bool depends_on(int coord_index) const { return depends_node(node_.get(), coord_index); }

  // True when the expression references no coordinate (pi/e allowed).
  bool is_constant() const {
    return !depends_any(node_.get());
  }

  std::string str() const {
    std::string out;
    print_node(node_.get(), out);
    return out;
  }

  friend Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::mk_add(a.node_, b.node_)); }
  friend Expr operator-(const Expr& a, const Expr& b) { return Expr(detail::mk_sub(a.node_, b.node_)); }
  friend Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::mk_mul(a.node_, b.node_)); }
  friend Expr operator/(const Expr& a, const Expr& b) { return Expr(detail::mk_div(a.node_, b.node_)); }
  friend Expr operator-(const Expr& a) { return Expr(detail::mk_neg(a.node_)); }

 private:
  ExprPtr node_;

  static double eval_node(const ExprNode* n, std::span<const double> x) {
    switch (n->kind) {
      case ExprKind::Number: return n->value;
      case ExprKind::ConstPi: return std::numbers::pi;
      case ExprKind::ConstE: return std::numbers::e;
      case ExprKind::Coord:
        if (n->coord < 0 || n->coord >= static_cast<int>(x.size()))
          throw DimensionError("coordinate index out of range in eval");
        return x[static_cast<std::size_t>(n->coord)];
      case ExprKind::Neg: return -eval_node(n->a.get(), x);
      case ExprKind::Add: return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
      case ExprKind::Sub: return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
      case ExprKind::Mul: return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
      case ExprKind::Div: return eval_node(n->a.get(), x) / eval_node(n->b.get(), x);
      case ExprKind::Pow: return std::pow(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
      case ExprKind::Call: return detail::call_value(n->fn, eval_node(n->a.get(), x));
    }
    return 0.0;  // unreachable
  }

  static bool depends_node(const ExprNode* n, int idx) {
    switch (n->kind) {
      case ExprKind::Coord: return n->coord == idx;
      case ExprKind::Neg:
      case ExprKind::Call: return depends_node(n->a.get(), idx);
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
      case ExprKind::Pow:
        return depends_node(n->a.get(), idx) || depends_node(n->b.get(), idx);
      default: return false;
    }
  }

  static bool depends_any(const ExprNode* n) {
    switch (n->kind) {
      case ExprKind::Coord: return true;
      case ExprKind::Neg:
      case ExprKind::Call: return depends_any(n->a.get());
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
      case ExprKind::Pow:
        return depends_any(n->a.get()) || depends_any(n->b.get());
      default: return false;
    }
  }

  static ExprPtr diff_node(const ExprPtr& e, int k) {
    using namespace detail;
    const ExprNode* n = e.get();
    switch (n->kind) {
      case ExprKind::Number:
      case ExprKind::ConstPi:
      case ExprKind::ConstE: return mk_num(0.0);
      case ExprKind::Coord: return mk_num(n->coord == k ? 1.0 : 0.0);
      case ExprKind::Neg: return mk_neg(diff_node(n->a, k));
      case ExprKind::Add: return mk_add(diff_node(n->a, k), diff_node(n->b, k));
      case ExprKind::Sub: return mk_sub(diff_node(n->a, k), diff_node(n->b, k));
      case ExprKind::Mul:
        return mk_add(mk_mul(diff_node(n->a, k), n->b), mk_mul(n->a, diff_node(n->b, k)));
      case ExprKind::Div:
        return mk_div(mk_sub(mk_mul(diff_node(n->a, k), n->b), mk_mul(n->a, diff_node(n->b, k))),
                      mk_pow(n->b, mk_num(2.0)));
      case ExprKind::Pow: {
        ExprPtr da = diff_node(n->a, k);
        if (!depends_node(n->b.get(), k) && !depends_any_ptr(n->b)) {
          // constant exponent c: d(u^c) = c*u^(c-1)*u'
          ExprPtr c = n->b;
          ExprPtr cm1 = is_num(c) ? mk_num(c->value - 1.0) : mk_sub(c, mk_num(1.0));
          return mk_mul(mk_mul(c, mk_pow(n->a, cm1)), da);
        }
        // general u^v = exp(v*log u): d = u^v*(v'*log(u) + v*u'/u)
        ExprPtr db = diff_node(n->b, k);
        ExprPtr term = mk_add(mk_mul(db, mk_call(Func::Log, n->a)),
                              mk_div(mk_mul(n->b, da), n->a));
        return mk_mul(e, term);
      }
      case ExprKind::Call: {
        ExprPtr da = diff_node(n->a, k);
        ExprPtr outer;
        switch (n->fn) {
          case Func::Sin: outer = mk_call(Func::Cos, n->a); break;
          case Func::Cos: outer = mk_neg(mk_call(Func::Sin, n->a)); break;
          case Func::Tan:
            outer = mk_div(mk_num(1.0), mk_pow(mk_call(Func::Cos, n->a), mk_num(2.0)));
            break;
          case Func::Sinh: outer = mk_call(Func::Cosh, n->a); break;
          case Func::Cosh: outer = mk_call(Func::Sinh, n->a); break;
          case Func::Tanh:
            outer = mk_div(mk_num(1.0), mk_pow(mk_call(Func::Cosh, n->a), mk_num(2.0)));
            break;
          case Func::Exp: outer = e; break;
          case Func::Log: outer = mk_div(mk_num(1.0), n->a); break;
          case Func::Sqrt: outer = mk_div(mk_num(0.5), e); break;
        }
        return mk_mul(outer, da);
      }
    }
    return detail::mk_num(0.0);  // unreachable
  }

  static bool depends_any_ptr(const ExprPtr& e) { return depends_any(e.get()); }

  static ExprPtr simplify_node(const ExprPtr& e) {
    using namespace detail;
    const ExprNode* n = e.get();
    switch (n->kind) {
      case ExprKind::Number:
      case ExprKind::ConstPi:
      case ExprKind::ConstE:
      case ExprKind::Coord: return e;
      case ExprKind::Neg: return mk_neg(simplify_node(n->a));
      case ExprKind::Add: return mk_add(simplify_node(n->a), simplify_node(n->b));
      case ExprKind::Sub: return mk_sub(simplify_node(n->a), simplify_node(n->b));
      case ExprKind::Mul: return mk_mul(simplify_node(n->a), simplify_node(n->b));
      case ExprKind::Div: return mk_div(simplify_node(n->a), simplify_node(n->b));
      case ExprKind::Pow: return mk_pow(simplify_node(n->a), simplify_node(n->b));
      case ExprKind::Call: return mk_call(n->fn, simplify_node(n->a));
    }
    return e;  // unreachable
  }

  static void print_node(const ExprNode* n, std::string& out) {
    switch (n->kind) {
      case ExprKind::Number: out += detail::format_double(n->value); return;
      case ExprKind::ConstPi: out += "pi"; return;
      case ExprKind::ConstE: out += "e"; return;
      case ExprKind::Coord: out += n->name; return;
      case ExprKind::Neg:
        out += "(-";
        print_node(n->a.get(), out);
        out += ")";
        return;
      case ExprKind::Call:
        out += detail::func_name(n->fn);
        out += "(";
        print_node(n->a.get(), out);
        out += ")";
        return;
      default: {
        const char* op = "?";
        switch (n->kind) {
          case ExprKind::Add: op = " + "; break;
          case ExprKind::Sub: op = " - "; break;
          case ExprKind::Mul: op = " * "; break;
          case ExprKind::Div: op = " / "; break;
          case ExprKind::Pow: op = " ^ "; break;
          default: break;
        }
        out += "(";
        print_node(n->a.get(), out);
        out += op;
        print_node(n->b.get(), out);
        out += ")";
        return;
      }
    }
  }
};

inline Expr sin(const Expr& x) { return Expr(detail::mk_call(Func::Sin, x.node())); }
inline Expr cos(const Expr& x) { return Expr(detail::mk_call(Func::Cos, x.node())); }
inline Expr tan(const Expr& x) { return Expr(detail::mk_call(Func::Tan, x.node())); }
inline Expr sinh(const Expr& x) { return Expr(detail::mk_call(Func::Sinh, x.node())); }
inline Expr cosh(const Expr& x) { return Expr(detail::mk_call(Func::Cosh, x.node())); }
inline Expr tanh(const Expr& x) { return Expr(detail::mk_call(Func::Tanh, x.node())); }
inline Expr exp(const Expr& x) { return Expr(detail::mk_call(Func::Exp, x.node())); }
inline Expr log(const Expr& x) { return Expr(detail::mk_call(Func::Log, x.node())); }
inline Expr sqrt(const Expr& x) { return Expr(detail::mk_call(Func::Sqrt, x.node())); }
inline Expr pow(const Expr& x, const Expr& y) { return Expr(detail::mk_pow(x.node(), y.node())); }
inline Expr pow(const Expr& x, double y) { return pow(x, Expr::number(y)); }

namespace detail {

// Recursive-descent parser.
//
//   expr    := add
//   add     := mul (('+'|'-') mul)*
//   mul     := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          // right-associative
//   primary := NUMBER | IDENT | IDENT '(' args ')' | '(' expr ')'
//
// '^' binds tighter than unary minus: "-x^2" is -(x^2).
class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> coords)
      : src_(src), coords_(coords) {}

  ExprPtr parse() {
    ExprPtr e = parse_add();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
    ExprNode n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    return mk_node(std::move(n));
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    for (;;) {
      if (accept('+'))
        e = binary(ExprKind::Add, e, parse_mul());
      else if (accept('-'))
        e = binary(ExprKind::Sub, e, parse_mul());
      else
        return e;
    }
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = binary(ExprKind::Mul, e, parse_unary());
      else if (accept('/'))
        e = binary(ExprKind::Div, e, parse_unary());
      else
        return e;
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) {
      ExprNode n;
      n.kind = ExprKind::Neg;
      n.a = parse_unary();
      return mk_node(std::move(n));
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (accept('^')) {
      ExprNode n;
      n.kind = ExprKind::Pow;
      n.a = base;
      n.b = parse_unary();  // right-associative; exponent may carry a sign
      return mk_node(std::move(n));
    }
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = src_[pos_];
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_ident();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_add();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return e;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    double v = 0.0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec == std::errc::result_out_of_range)
      throw SyntaxError("numeric literal out of range", pos_);
    if (ec != std::errc() || p == first) throw SyntaxError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(p - first);
    return mk_num(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')
        ++pos_;
      else
        break;
    }
    std::string name(src_.substr(start, pos_ - start));

    if (peek('(')) return parse_call(name, start);

    if (name == "pi") {
      ExprNode n;
      n.kind = ExprKind::ConstPi;
      return mk_node(std::move(n));
    }
    if (name == "e") {
      ExprNode n;
      n.kind = ExprKind::ConstE;
      return mk_node(std::move(n));
    }
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == name) {
        ExprNode n;
        n.kind = ExprKind::Coord;
        n.coord = static_cast<int>(i);
        n.name = name;
        return mk_node(std::move(n));
      }
    }
    throw UnknownIdentifier(name, start);
  }

  ExprPtr parse_call(const std::string& name, std::size_t name_off) {
    accept('(');
    std::vector<ExprPtr> args;
    if (!peek(')')) {
      args.push_back(parse_add());
      while (accept(',')) args.push_back(parse_add());
    }
    if (!accept(')')) throw SyntaxError("expected ')' in call", pos_);

    if (name == "pow") {
      if (args.size() != 2) throw ArityError("pow", 2, static_cast<int>(args.size()), name_off);
      ExprNode n;
      n.kind = ExprKind::Pow;
      n.a = args[0];
      n.b = args[1];
      return mk_node(std::move(n));
    }
    static const struct {
      const char* name;
      Func fn;
    } table[] = {{"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan},
                 {"sinh", Func::Sinh}, {"cosh", Func::Cosh}, {"tanh", Func::Tanh},
                 {"exp", Func::Exp},   {"log", Func::Log},   {"sqrt", Func::Sqrt}};
    for (const auto& row : table) {
      if (name == row.name) {
        if (args.size() != 1)
          throw ArityError(name, 1, static_cast<int>(args.size()), name_off);
        ExprNode n;
        n.kind = ExprKind::Call;
        n.fn = row.fn;
        n.a = args[0];
        return mk_node(std::move(n));
      }
    }
    throw UnknownIdentifier(name, name_off);
  }
};

}  // namespace detail

// Parse `src` against the given coordinate names. Coordinates evaluate to the
// entry of the point vector with the same position in `coords`.
inline Expr parse_expr(std::string_view src, std::span<const std::string> coords) {
  detail::Parser p(src, coords);
  return Expr(p.parse());
}

inline Expr parse_expr(std::string_view src, std::initializer_list<std::string> coords) {
  std::vector<std::string> v(coords);
  return parse_expr(src, std::span<const std::string>(v));
}

}  // namespace etv

#endif
