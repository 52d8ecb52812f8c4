#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace accelwave {

/// A real number or a signed infinity, carried as a tag rather than as an IEEE
/// infinity so that it never leaks into arithmetic by accident.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr ExtendedReal positive_infinity() { return ExtendedReal(+1, 0); }
  static constexpr ExtendedReal negative_infinity() { return ExtendedReal(-1, 0); }

  constexpr bool is_finite() const { return inf_sign_ == 0; }
  constexpr bool is_infinite() const { return inf_sign_ != 0; }
  constexpr int infinity_sign() const { return inf_sign_; }

  /// Finite value; throws if this is an infinity.
  double value() const {
    if (inf_sign_ != 0) throw std::logic_error("ExtendedReal: value() of an infinity");
    return value_;
  }

  /// IEEE rendering, for output only.
  double to_double() const {
    if (inf_sign_ == 0) return value_;
    return inf_sign_ * std::numeric_limits<double>::infinity();
  }

  constexpr bool is_zero() const { return inf_sign_ == 0 && value_ == 0.0; }

  /// Sign of the represented quantity (-1, 0, +1).
  constexpr int sign() const {
    if (inf_sign_ != 0) return inf_sign_;
    return (value_ > 0.0) - (value_ < 0.0);
  }

  friend constexpr bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  constexpr ExtendedReal(int sign, int) : inf_sign_(sign) {}

  double value_ = 0.0;
  int inf_sign_ = 0;
};

/// Scale by a finite nonzero-or-zero factor; infinity times a nonzero factor
/// keeps its tag, infinity times zero is rejected.
inline ExtendedReal scale(const ExtendedReal& x, double factor) {
  if (x.is_finite()) return ExtendedReal(x.value() * factor);
  if (factor == 0.0) throw std::domain_error("ExtendedReal: infinity times zero");
  return (factor > 0.0) == (x.infinity_sign() > 0) ? ExtendedReal::positive_infinity()
                                                    : ExtendedReal::negative_infinity();
}

}  // namespace accelwave
