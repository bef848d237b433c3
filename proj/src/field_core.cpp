#include "bellfield/field_core.hpp"

#include <cmath>
#include <string>

#include "bellfield/errors.hpp"

namespace bellfield {

namespace {
constexpr double normalization_tol = 1e-12;
}

SchmidtPair::SchmidtPair(double kappa1, double kappa2) : kappa1_(kappa1), kappa2_(kappa2) {
  if (!std::isfinite(kappa1) || !std::isfinite(kappa2) || kappa1 < 0.0 || kappa2 < 0.0 ||
      kappa1 > 1.0 || kappa2 > 1.0)
    throw InvalidArgument("Schmidt coefficients must lie in [0, 1]");
  if (std::abs(kappa1 * kappa1 + kappa2 * kappa2 - 1.0) > normalization_tol)
    throw InvalidArgument("Schmidt coefficients must satisfy kappa1^2 + kappa2^2 = 1, got " +
                          std::to_string(kappa1 * kappa1 + kappa2 * kappa2));
  if (kappa1 < kappa2 - normalization_tol)
    throw InvalidArgument("Schmidt coefficients must be ordered kappa1 >= kappa2");
}

SchmidtPair SchmidtPair::unpolarized() {
  const double k = std::sqrt(0.5);
  return {k, k};
}

SchmidtPair SchmidtPair::from_kappa1(double kappa1) {
  if (!(kappa1 >= 0.0 && kappa1 <= 1.0))
    throw InvalidArgument("kappa1 must lie in [0, 1]");
  return {kappa1, std::sqrt(std::max(0.0, 1.0 - kappa1 * kappa1))};
}

BeamState BeamState::schmidt_source(const SchmidtPair &schmidt, double intensity) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw InvalidArgument("beam intensity must be finite and non-negative");
  BeamState beam;
  beam.reference_intensity = intensity;
  beam.coeffs(0, 0) = schmidt.kappa1();
  beam.coeffs(1, 1) = schmidt.kappa2();
  return beam;
}

PolVector rotate_pol(const PolVector &v, Angle a) { return rotation<Complex>(a) * v; }

BeamState rotate_pol(const BeamState &beam, Angle a) {
  BeamState out = beam;
  out.coeffs = rotation<Complex>(a) * beam.coeffs;
  out.pol_frame = beam.pol_frame + a;
  return out;
}

BeamState rotate_fun(const BeamState &beam, Angle b) {
  BeamState out = beam;
  out.coeffs = beam.coeffs * rotation<Complex>(b).transpose();
  out.fun_frame = beam.fun_frame + b;
  return out;
}

BeamState to_frames(const BeamState &beam, Angle pol, Angle fun) {
  return rotate_fun(rotate_pol(beam, pol - beam.pol_frame), fun - beam.fun_frame);
}

BeamState project_pol(const BeamState &beam, Angle axis) {
  BeamState out = beam;
  out.coeffs = projector<Complex>(axis - beam.pol_frame) * beam.coeffs;
  return out;
}

double joint_projection(const BeamState &beam, Angle a, Angle b, int j, int k) {
  if (j < 1 || j > 2 || k < 1 || k > 2)
    throw InvalidArgument("projection indices must be 1 or 2");
  const double norm = beam.coeffs.squaredNorm();
  if (norm <= 0.0)
    throw InvalidArgument("joint projection of a zero beam is undefined");
  return std::norm(to_frames(beam, a, b).coeffs(j - 1, k - 1)) / norm;
}

} // namespace bellfield
