#pragma once

#include <cmath>
#include <random>

#include "bellfield/angle.hpp"
#include "bellfield/field_core.hpp"

namespace bellfield::testing {

inline Angle random_angle(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-pi, pi);
  return Angle(u(rng));
}

/// kappa1 drawn so that the degree of polarization is uniform on [0, 1].
inline SchmidtPair random_schmidt(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double p = u(rng);
  return SchmidtPair::from_kappa1(std::sqrt((1.0 + p) / 2.0));
}

/// Independent closed form of |<f_k^b|<u_j^a|e>|^2 for the Schmidt-frame
/// state kappa1 |u1>|f1> + kappa2 |u2>|f2>.
inline double projection_oracle(double k1, double k2, double a, double b, int j, int k) {
  const double aj = a + (j - 1) * pi / 2.0;
  const double bk = b + (k - 1) * pi / 2.0;
  const double amp = k1 * std::cos(aj) * std::cos(bk) + k2 * std::sin(aj) * std::sin(bk);
  return amp * amp;
}

} // namespace bellfield::testing
