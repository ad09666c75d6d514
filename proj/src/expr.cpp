#include "dynlab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace dynlab {

namespace ex {

namespace {
Expr node(Op op, Expr a = nullptr, Expr b = nullptr) {
  return std::make_shared<const ExprNode>(ExprNode{op, {}, 0, std::move(a), std::move(b)});
}
}  // namespace

Expr constant(cplx c) { return std::make_shared<const ExprNode>(ExprNode{Op::Const, c, 0, nullptr, nullptr}); }
Expr var() { return node(Op::Var); }
Expr add(Expr a, Expr b) { return node(Op::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return node(Op::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return node(Op::Mul, std::move(a), std::move(b)); }
Expr div(Expr a, Expr b) { return node(Op::Div, std::move(a), std::move(b)); }
Expr neg(Expr a) { return node(Op::Neg, std::move(a)); }
Expr pow(Expr a, int k) {
  return std::make_shared<const ExprNode>(ExprNode{Op::Pow, {}, k, std::move(a), nullptr});
}
Expr exp(Expr a) { return node(Op::Exp, std::move(a)); }
Expr sin(Expr a) { return node(Op::Sin, std::move(a)); }
Expr cos(Expr a) { return node(Op::Cos, std::move(a)); }

}  // namespace ex

namespace {

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div;
}

bool is_const(const Expr& e, double v) {
  return e->op == Op::Const && e->value == cplx(v, 0.0);
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case Op::Const: return a->value == b->value;
    case Op::Var: return true;
    case Op::Pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    default: break;
  }
  if (is_binary(a->op)) return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  return structurally_equal(a->lhs, b->lhs);
}

bool depends_on_z(const Expr& e) {
  if (!e) return false;
  if (e->op == Op::Var) return true;
  return depends_on_z(e->lhs) || depends_on_z(e->rhs);
}

std::size_t node_count(const Expr& e) {
  if (!e) return 0;
  return 1 + node_count(e->lhs) + node_count(e->rhs);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"'+'", "'-'", "'*'", "'/'", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string msg = "syntax error at offset " + std::to_string(pos_) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    throw ParseError(ParseError::Kind::Syntax, pos_, std::move(expected), msg);
  }

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

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = ex::add(lhs, term());
      } else if (accept('-')) {
        lhs = ex::sub(lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = ex::mul(lhs, factor());
      } else if (accept('/')) {
        lhs = ex::div(lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    const bool negate = accept('-');
    Expr b = base();
    if (accept('^')) b = ex::pow(b, integer());
    return negate ? ex::neg(b) : b;
  }

  int integer() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < src_.size() && src_[pos_] == '-') ++pos_;
    const std::size_t digits = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == digits) {
      pos_ = start;
      fail({"integer exponent"});
    }
    int k = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
    if (ec != std::errc{} || ptr != src_.data() + pos_) {
      pos_ = start;
      fail({"integer exponent in int range"});
    }
    return k;
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digit_at = [&](std::size_t p) {
      return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
    };
    while (digit_at(pos_)) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (digit_at(pos_)) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (digit_at(p)) {
        pos_ = p;
        while (digit_at(pos_)) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || ptr != src_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail({"number"});
    }
    return ex::constant(v);
  }

  Expr base() {
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail({"')'"});
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string_view id = src_.substr(start, pos_ - start);
      if (id == "z") return ex::var();
      if (id == "pi") return ex::constant(std::numbers::pi);
      if (id == "e") return ex::constant(std::numbers::e);
      if (id == "i") return ex::constant(cplx(0.0, 1.0));
      Expr (*fn)(Expr) = nullptr;
      if (id == "exp") fn = ex::exp;
      if (id == "sin") fn = ex::sin;
      if (id == "cos") fn = ex::cos;
      if (!fn) {
        throw ParseError(ParseError::Kind::UnknownIdentifier, start, {"z", "pi", "e", "i", "exp", "sin", "cos"},
                         "unknown identifier '" + std::string(id) + "' at offset " + std::to_string(start));
      }
      if (!accept('(')) fail({"'('"});
      Expr arg = expr();
      if (!accept(')')) fail({"')'"});
      return fn(arg);
    }
    fail({"number", "'z'", "'pi'", "'e'", "'i'", "function", "'('"});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view src) { return Parser(src).parse_all(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_const(cplx c) {
  if (c == cplx(0.0, 1.0)) return "i";
  if (c.imag() == 0.0 && !std::signbit(c.real())) {
    if (c.real() == std::numbers::pi) return "pi";
    if (c.real() == std::numbers::e) return "e";
    return format_real(c.real());
  }
  // Not produced by the parser; printed as an equivalent expression.
  std::string re = format_real(std::abs(c.real()));
  std::string im = format_real(std::abs(c.imag()));
  std::string out = "(";
  out += std::signbit(c.real()) ? "(-" + re + ")" : re;
  out += std::signbit(c.imag()) ? " - " : " + ";
  out += im + "*i)";
  return out;
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e->op) {
    case Op::Const: return format_const(e->value);
    case Op::Var: return "z";
    case Op::Add: return "(" + to_string(e->lhs) + " + " + to_string(e->rhs) + ")";
    case Op::Sub: return "(" + to_string(e->lhs) + " - " + to_string(e->rhs) + ")";
    case Op::Mul: return "(" + to_string(e->lhs) + " * " + to_string(e->rhs) + ")";
    case Op::Div: return "(" + to_string(e->lhs) + " / " + to_string(e->rhs) + ")";
    case Op::Neg: return "(-" + to_string(e->lhs) + ")";
    case Op::Pow: return "(" + to_string(e->lhs) + "^" + std::to_string(e->exponent) + ")";
    case Op::Exp: return "exp(" + to_string(e->lhs) + ")";
    case Op::Sin: return "sin(" + to_string(e->lhs) + ")";
    case Op::Cos: return "cos(" + to_string(e->lhs) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

bool is_neg_one(const Expr& e) { return e->op == Op::Neg && is_const(e->lhs, 1.0); }

Expr mk_neg(const Expr& a) {
  if (is_const(a, 0.0)) return a;
  if (a->op == Op::Neg) return a->lhs;
  return ex::neg(a);
}

Expr mk_add(const Expr& a, const Expr& b);

Expr mk_sub(const Expr& a, const Expr& b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return mk_neg(b);
  if (b->op == Op::Neg) return mk_add(a, b->lhs);
  return ex::sub(a, b);
}

Expr mk_add(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (b->op == Op::Neg) return mk_sub(a, b->lhs);
  return ex::add(a, b);
}

Expr mk_mul(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return ex::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_neg_one(a)) return mk_neg(b);
  if (is_neg_one(b)) return mk_neg(a);
  return ex::mul(a, b);
}

Expr mk_div(const Expr& a, const Expr& b) {
  if (is_const(a, 0.0)) return a;
  if (is_const(b, 1.0)) return a;
  return ex::div(a, b);
}

Expr mk_pow(const Expr& a, int k) {
  if (k == 0) return ex::constant(1.0);
  if (k == 1) return a;
  return ex::pow(a, k);
}

}  // namespace

Expr differentiate(const Expr& e) {
  switch (e->op) {
    case Op::Const: return ex::constant(0.0);
    case Op::Var: return ex::constant(1.0);
    case Op::Add: return mk_add(differentiate(e->lhs), differentiate(e->rhs));
    case Op::Sub: return mk_sub(differentiate(e->lhs), differentiate(e->rhs));
    case Op::Mul:
      return mk_add(mk_mul(differentiate(e->lhs), e->rhs), mk_mul(e->lhs, differentiate(e->rhs)));
    case Op::Div: {
      const Expr da = differentiate(e->lhs);
      const Expr db = differentiate(e->rhs);
      return mk_sub(mk_div(da, e->rhs), mk_div(mk_mul(e->lhs, db), ex::pow(e->rhs, 2)));
    }
    case Op::Neg: return mk_neg(differentiate(e->lhs));
    case Op::Pow: {
      const int k = e->exponent;
      if (k == 0) return ex::constant(0.0);
      Expr outer = mk_mul(ex::constant(static_cast<double>(k)), mk_pow(e->lhs, k - 1));
      return mk_mul(outer, differentiate(e->lhs));
    }
    case Op::Exp: return mk_mul(e, differentiate(e->lhs));
    case Op::Sin: return mk_mul(ex::cos(e->lhs), differentiate(e->lhs));
    case Op::Cos: return mk_mul(ex::neg(ex::sin(e->lhs)), differentiate(e->lhs));
  }
  return ex::constant(0.0);
}

// ---------------------------------------------------------------------------
// Evaluation

XComplex eval(const Expr& e, const XComplex& z) {
  switch (e->op) {
    case Op::Const: return XComplex(e->value);
    case Op::Var: return z;
    case Op::Add: return eval(e->lhs, z) + eval(e->rhs, z);
    case Op::Sub: return eval(e->lhs, z) - eval(e->rhs, z);
    case Op::Mul: return eval(e->lhs, z) * eval(e->rhs, z);
    case Op::Div: return eval(e->lhs, z) / eval(e->rhs, z);
    case Op::Neg: return -eval(e->lhs, z);
    case Op::Pow: return ipow(eval(e->lhs, z), e->exponent);
    case Op::Exp: return xexp(eval(e->lhs, z));
    case Op::Sin: return xsin(eval(e->lhs, z));
    case Op::Cos: return xcos(eval(e->lhs, z));
  }
  return XComplex::undefined();
}

Program::Program(const Expr& e) { emit(e, 1); }

void Program::emit(const Expr& e, int depth) {
  max_depth_ = std::max(max_depth_, depth);
  if (is_binary(e->op)) {
    emit(e->lhs, depth);
    emit(e->rhs, depth + 1);
  } else if (e->lhs) {
    emit(e->lhs, depth);
  }
  code_.push_back(Instr{e->op, e->exponent, XComplex(e->value)});
}

XComplex Program::operator()(const XComplex& z) const {
  constexpr int kInline = 32;
  XComplex inline_stack[kInline];
  std::vector<XComplex> heap;
  XComplex* st = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    st = heap.data();
  }
  int top = -1;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: st[++top] = in.value; break;
      case Op::Var: st[++top] = z; break;
      case Op::Add: st[top - 1] = st[top - 1] + st[top]; --top; break;
      case Op::Sub: st[top - 1] = st[top - 1] - st[top]; --top; break;
      case Op::Mul: st[top - 1] = st[top - 1] * st[top]; --top; break;
      case Op::Div: st[top - 1] = st[top - 1] / st[top]; --top; break;
      case Op::Neg: st[top] = -st[top]; break;
      case Op::Pow: st[top] = ipow(st[top], in.exponent); break;
      case Op::Exp: st[top] = xexp(st[top]); break;
      case Op::Sin: st[top] = xsin(st[top]); break;
      case Op::Cos: st[top] = xcos(st[top]); break;
    }
  }
  return top == 0 ? st[0] : XComplex::undefined();
}

}  // namespace dynlab
