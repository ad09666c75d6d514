#pragma once

// Points of the extended complex plane and the chordal metric on the
// Riemann sphere.

#include <complex>
#include <stdexcept>
#include <string>

namespace dynlab {

using cplx = std::complex<double>;

class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

/// A finite complex value, the point at infinity, or an undefined value
/// (the result of evaluating at an essential singularity). Finite values
/// always have finite components.
class XComplex {
 public:
  enum class Kind : unsigned char { Finite, Infinity, Undefined };

  constexpr XComplex() = default;
  constexpr XComplex(double re, double im = 0.0) : value_(re, im) {}
  constexpr XComplex(cplx v) : value_(v) {}

  static constexpr XComplex infinity() { return XComplex(Kind::Infinity); }
  static constexpr XComplex undefined() { return XComplex(Kind::Undefined); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_infinity() const { return kind_ == Kind::Infinity; }
  constexpr bool is_undefined() const { return kind_ == Kind::Undefined; }

  /// Only meaningful for finite values; zero otherwise.
  constexpr cplx value() const { return value_; }
  constexpr double re() const { return value_.real(); }
  constexpr double im() const { return value_.imag(); }

  friend bool operator==(const XComplex& a, const XComplex& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::Finite || a.value_ == b.value_;
  }

  std::string to_string() const;

 private:
  constexpr explicit XComplex(Kind k) : kind_(k) {}

  cplx value_{0.0, 0.0};
  Kind kind_ = Kind::Finite;
};

/// Classifies a raw floating-point result: NaN components are
/// indeterminate, infinite components mean the modulus overflowed.
XComplex guard(double raw_re, double raw_im);
inline XComplex guard(cplx raw) { return guard(raw.real(), raw.imag()); }

/// Chordal distance with sphere diameter 2. Throws MetricError on
/// undefined input.
double chordal(const XComplex& a, const XComplex& b);

// Arithmetic under the guard policy. Undefined is absorbing.
XComplex operator+(const XComplex& a, const XComplex& b);
XComplex operator-(const XComplex& a, const XComplex& b);
XComplex operator*(const XComplex& a, const XComplex& b);
XComplex operator/(const XComplex& a, const XComplex& b);
XComplex operator-(const XComplex& a);
XComplex ipow(const XComplex& a, int k);

/// Real part above which exp() is reported as infinity.
inline constexpr double kExpOverflowBound = 700.0;

XComplex xexp(const XComplex& a);
XComplex xsin(const XComplex& a);
XComplex xcos(const XComplex& a);

}  // namespace dynlab
