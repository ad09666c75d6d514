#include "dynlab/xcomplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dynlab {

namespace {

// log of the largest finite double, rounded down.
constexpr double kLogMax = 709.0;

// Result of an operation on finite operands whose raw value came out
// non-finite: decide from the operand magnitudes whether it overflowed.
XComplex resolve_overflow(cplx raw, double log_modulus) {
  if (std::isfinite(raw.real()) && std::isfinite(raw.imag())) return XComplex(raw);
  if (log_modulus > kLogMax) return XComplex::infinity();
  return guard(raw.real(), raw.imag());
}

double log_abs(cplx z) {
  const double m = std::abs(z);
  return m == 0.0 ? -HUGE_VAL : std::log(m);
}

}  // namespace

std::string XComplex::to_string() const {
  switch (kind_) {
    case Kind::Infinity: return "inf";
    case Kind::Undefined: return "undefined";
    case Kind::Finite: break;
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", re(), im());
  return buf;
}

XComplex guard(double raw_re, double raw_im) {
  if (std::isnan(raw_re) || std::isnan(raw_im)) return XComplex::undefined();
  if (std::isinf(raw_re) || std::isinf(raw_im)) return XComplex::infinity();
  return XComplex(raw_re, raw_im);
}

double chordal(const XComplex& a, const XComplex& b) {
  if (a.is_undefined() || b.is_undefined()) throw MetricError("metric undefined");
  if (a.is_infinity() && b.is_infinity()) return 0.0;
  if (a.is_infinity()) return 2.0 / std::sqrt(1.0 + std::norm(b.value()));
  if (b.is_infinity()) return 2.0 / std::sqrt(1.0 + std::norm(a.value()));
  const cplx z = a.value();
  const cplx w = b.value();
  // Scale-safe form of 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)).
  const double na = std::hypot(1.0, std::abs(z));
  const double nb = std::hypot(1.0, std::abs(w));
  const double lo = std::min(na, nb), hi = std::max(na, nb);
  const double d = 2.0 * (std::abs(z - w) / hi) / lo;
  return d > 2.0 ? 2.0 : d;
}

XComplex operator+(const XComplex& a, const XComplex& b) {
  if (a.is_undefined() || b.is_undefined()) return XComplex::undefined();
  if (a.is_infinity() && b.is_infinity()) return XComplex::undefined();
  if (a.is_infinity() || b.is_infinity()) return XComplex::infinity();
  return guard(a.value() + b.value());
}

XComplex operator-(const XComplex& a) {
  if (!a.finite()) return a;
  return XComplex(-a.value());
}

XComplex operator-(const XComplex& a, const XComplex& b) { return a + (-b); }

XComplex operator*(const XComplex& a, const XComplex& b) {
  if (a.is_undefined() || b.is_undefined()) return XComplex::undefined();
  if (a.is_infinity() || b.is_infinity()) {
    const XComplex& other = a.is_infinity() ? b : a;
    if (other.finite() && other.value() == cplx(0.0, 0.0)) return XComplex::undefined();
    return XComplex::infinity();
  }
  const cplx x = a.value();
  const cplx y = b.value();
  const cplx raw(x.real() * y.real() - x.imag() * y.imag(),
                 x.real() * y.imag() + x.imag() * y.real());
  return resolve_overflow(raw, log_abs(x) + log_abs(y));
}

XComplex operator/(const XComplex& a, const XComplex& b) {
  if (a.is_undefined() || b.is_undefined()) return XComplex::undefined();
  if (a.is_infinity()) return b.is_infinity() ? XComplex::undefined() : XComplex::infinity();
  if (b.is_infinity()) return XComplex(0.0, 0.0);
  const cplx x = a.value();
  const cplx y = b.value();
  if (y == cplx(0.0, 0.0)) {
    return x == cplx(0.0, 0.0) ? XComplex::undefined() : XComplex::infinity();
  }
  if (x == cplx(0.0, 0.0)) return XComplex(0.0, 0.0);
  return resolve_overflow(x / y, log_abs(x) - log_abs(y));
}

XComplex ipow(const XComplex& a, int k) {
  if (a.is_undefined()) return a;
  if (a.is_infinity()) {
    if (k > 0) return a;
    if (k < 0) return XComplex(0.0, 0.0);
    return XComplex::undefined();
  }
  if (k == 0) return XComplex(1.0, 0.0);
  XComplex base = a;
  XComplex acc(1.0, 0.0);
  unsigned n = k < 0 ? static_cast<unsigned>(-static_cast<long>(k)) : static_cast<unsigned>(k);
  while (n != 0) {
    if (n & 1u) acc = acc * base;
    n >>= 1u;
    if (n != 0) base = base * base;
  }
  return k < 0 ? XComplex(1.0, 0.0) / acc : acc;
}

XComplex xexp(const XComplex& a) {
  if (!a.finite()) return XComplex::undefined();
  if (a.re() > kExpOverflowBound) return XComplex::infinity();
  return guard(std::exp(a.value()));
}

XComplex xsin(const XComplex& a) {
  if (!a.finite()) return XComplex::undefined();
  if (std::abs(a.im()) > kLogMax) return XComplex::infinity();
  return guard(std::sin(a.value()));
}

XComplex xcos(const XComplex& a) {
  if (!a.finite()) return XComplex::undefined();
  if (std::abs(a.im()) > kLogMax) return XComplex::infinity();
  return guard(std::cos(a.value()));
}

}  // namespace dynlab
