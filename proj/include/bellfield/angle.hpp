#pragma once

#include <cmath>
#include <numbers>

namespace bellfield {

inline constexpr double pi = std::numbers::pi;

/// Plane rotation angle in radians. Values are kept as given; comparisons go
/// through the wrapped difference so 0 and 2*pi compare equal.
class Angle {
public:
  constexpr Angle() = default;
  constexpr explicit Angle(double radians) : radians_(radians) {}

  static constexpr Angle degrees(double deg) { return Angle(deg * pi / 180.0); }

  constexpr double rad() const { return radians_; }

  /// Representative in (-pi, pi].
  double wrapped() const {
    double r = std::remainder(radians_, 2.0 * pi);
    return r == -pi ? pi : r;
  }

  double cos() const { return std::cos(radians_); }
  double sin() const { return std::sin(radians_); }

  constexpr Angle operator-() const { return Angle(-radians_); }
  constexpr Angle &operator+=(Angle o) {
    radians_ += o.radians_;
    return *this;
  }
  constexpr Angle &operator-=(Angle o) {
    radians_ -= o.radians_;
    return *this;
  }
  friend constexpr Angle operator+(Angle l, Angle r) { return l += r; }
  friend constexpr Angle operator-(Angle l, Angle r) { return l -= r; }
  friend constexpr Angle operator*(double k, Angle a) { return Angle(k * a.radians_); }

private:
  double radians_ = 0.0;
};

inline constexpr Angle quarter_turn{pi / 2.0};

/// Signed difference l - r reduced to (-pi, pi].
inline double wrapped_difference(Angle l, Angle r) { return (l - r).wrapped(); }

inline bool near(Angle l, Angle r, double tol) {
  return std::abs(wrapped_difference(l, r)) <= tol;
}

} // namespace bellfield
