#pragma once

#include <stdexcept>
#include <string>

#include "dynlab/xcomplex.hpp"

namespace dynlab {

/// Axis-aligned window [re_min, re_max] x [im_min, im_max].
struct Rect {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;

  bool valid() const { return re_min < re_max && im_min < im_max; }
  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  bool contains(cplx z) const {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
  /// Same center, each side scaled by `factor`.
  Rect expanded(double factor) const {
    const double cx = 0.5 * (re_min + re_max), cy = 0.5 * (im_min + im_max);
    const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
    return {cx - hw, cx + hw, cy - hh, cy + hh};
  }
  void require_valid() const {
    if (!valid()) throw std::invalid_argument("invalid window: need re_min<re_max and im_min<im_max");
  }
  bool operator==(const Rect&) const = default;
};

}  // namespace dynlab
