#pragma once

// Expression trees for complex functions of one variable z: parsing,
// printing, symbolic differentiation and guarded evaluation.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? base ('^' int)?
//   base   := number | 'z' | 'pi' | 'e' | 'i' | ident '(' expr ')' | '(' expr ')'
//   ident  := exp | sin | cos

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynlab/xcomplex.hpp"

namespace dynlab {

enum class Op : unsigned char { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable AST node. Binary ops use `lhs`/`rhs`, unary ops and Pow use
/// `lhs` only.
struct ExprNode {
  Op op;
  cplx value{};   // Const
  int exponent{}; // Pow
  Expr lhs;
  Expr rhs;
};

namespace ex {
Expr constant(cplx c);
Expr var();
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr neg(Expr a);
Expr pow(Expr a, int k);
Expr exp(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
}  // namespace ex

bool structurally_equal(const Expr& a, const Expr& b);
bool depends_on_z(const Expr& e);
std::size_t node_count(const Expr& e);

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier };
  ParseError(Kind kind, std::size_t offset, std::vector<std::string> expected, const std::string& msg)
      : std::runtime_error(msg), kind_(kind), offset_(offset), expected_(std::move(expected)) {}

  Kind kind() const { return kind_; }
  /// Byte offset into the source where the error was detected.
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::vector<std::string> expected_;
};

Expr parse(std::string_view src);

/// Prints a form that parses back to a structurally equal tree.
std::string to_string(const Expr& e);

/// d/dz with identity/annihilator folding only.
Expr differentiate(const Expr& e);

/// Reference tree-walking evaluator.
XComplex eval(const Expr& e, const XComplex& z);

/// Postfix compilation of an expression for hot loops. Produces the same
/// values as eval().
class Program {
 public:
  Program() = default;
  explicit Program(const Expr& e);

  XComplex operator()(const XComplex& z) const;
  bool empty() const { return code_.empty(); }

 private:
  struct Instr {
    Op op;
    int exponent;
    XComplex value;
  };
  void emit(const Expr& e, int depth);

  std::vector<Instr> code_;
  int max_depth_ = 0;
};

class FnError : public std::runtime_error {
 public:
  explicit FnError(const std::string& what) : std::runtime_error(what) {}
};

/// A map f together with its symbolic derivative and an optional declared
/// translation period P (f(z+P) = f(z) + P).
///
/// The body is also split as f(z) = z + C + R(z) when it has an additive
/// `z` term, so that the displacement f(z) - z can be evaluated without
/// cancelling against z. C collects the additive terms free of z.
class FnDef {
 public:
  FnDef(Expr body, std::optional<cplx> period = std::nullopt, std::string label = {});

  static FnDef from_source(std::string_view src, std::optional<cplx> period = std::nullopt);

  const Expr& body() const { return body_; }
  const Expr& derivative() const { return derivative_; }
  const std::optional<cplx>& period() const { return period_; }
  const std::string& label() const { return label_; }

  XComplex operator()(const XComplex& z) const { return f_(z); }
  XComplex deriv(const XComplex& z) const { return df_(z); }

  /// f(z) - z, evaluated so that a tiny increment is not lost against z.
  XComplex displacement(const XComplex& z) const;

  bool has_identity_term() const { return has_identity_; }
  cplx constant_shift() const { return shift_; }

  /// Multiple of the period carried by the constant shift: the translation
  /// T with f = base + T and base commuting with z -> z+P. Zero without a
  /// declared period.
  cplx deck_translation() const;

  /// f + c, keeping the period.
  FnDef translated(cplx c) const;

  /// True when the body contains exp, sin or cos.
  bool transcendental() const { return transcendental_; }

 private:
  void validate_period() const;

  Expr body_;
  Expr derivative_;
  std::optional<cplx> period_;
  std::string label_;
  Program f_;
  Program df_;
  Program remainder_;
  bool has_identity_ = false;
  bool transcendental_ = false;
  cplx shift_{0.0, 0.0};
};

}  // namespace dynlab
