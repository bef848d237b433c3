#pragma once

#include <complex>

#include <Eigen/Dense>

#include "bellfield/angle.hpp"

namespace bellfield {

using Complex = std::complex<double>;

/// Coefficients on the polarization basis |u1>, |u2>.
using PolVector = Eigen::Vector2cd;

/// Change-of-basis matrix for a rotation by `a`: maps coordinates in the
/// current basis to coordinates in the rotated basis
///   |v1^a> = cos a |v1> - sin a |v2>,   |v2^a> = sin a |v1> + cos a |v2>.
/// The same matrix serves polarization and function space.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> rotation(Angle a) {
  const Scalar c(a.cos());
  const Scalar s(a.sin());
  Eigen::Matrix<Scalar, 2, 2> r;
  r << c, -s, s, c;
  return r;
}

/// Coordinates of |v1^a> in the unrotated basis.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 1> analyzer_axis(Angle a) {
  return Eigen::Matrix<Scalar, 2, 1>(Scalar(a.cos()), Scalar(-a.sin()));
}

/// Rank-one projector |v1^a><v1^a| in the unrotated basis.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> projector(Angle a) {
  const auto v = analyzer_axis<Scalar>(a);
  return v * v.adjoint();
}

/// Schmidt coefficients of the field. kappa1 >= kappa2 >= 0 and
/// kappa1^2 + kappa2^2 = 1.
class SchmidtPair {
public:
  /// Throws InvalidArgument unless the pair is normalized to 1e-12 and ordered.
  SchmidtPair(double kappa1, double kappa2);

  static SchmidtPair unpolarized();
  static SchmidtPair from_kappa1(double kappa1);

  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }
  double product() const { return kappa1_ * kappa2_; }
  /// kappa1^2 - kappa2^2, the degree of polarization.
  double polarization() const { return kappa1_ * kappa1_ - kappa2_ * kappa2_; }

private:
  double kappa1_;
  double kappa2_;
};

/// Names |f_index^rotation>, a member of the rotated Schmidt function basis.
struct FunBasisLabel {
  int index = 1;
  Angle rotation{};
};

/// Exact two-party beam. The field amplitude is
///   sqrt(reference_intensity) * global_phase * sum_jk coeffs(j,k) |u_j>|f_k>
/// where |u_j> is the polarization basis rotated by pol_frame and |f_k> the
/// function basis rotated by fun_frame. A source beam has unit Frobenius norm;
/// optical elements only ever shrink it.
struct BeamState {
  double reference_intensity = 1.0;
  Eigen::Matrix2cd coeffs = Eigen::Matrix2cd::Zero();
  Angle pol_frame{};
  Angle fun_frame{};
  Complex global_phase{1.0, 0.0};

  /// kappa1 |u1>|f1> + kappa2 |u2>|f2> scaled to `intensity`.
  static BeamState schmidt_source(const SchmidtPair &schmidt, double intensity);

  double intensity() const { return reference_intensity * coeffs.squaredNorm(); }
  /// coeffs with the global phase folded in.
  Eigen::Matrix2cd amplitude() const { return global_phase * coeffs; }
};

PolVector rotate_pol(const PolVector &v, Angle a);

/// Re-expresses the beam in the polarization basis rotated by a further `a`.
BeamState rotate_pol(const BeamState &beam, Angle a);

/// Re-expresses the beam in the function basis rotated by a further `b`.
BeamState rotate_fun(const BeamState &beam, Angle b);

/// Re-expresses the beam with absolute frame angles (pol, fun).
BeamState to_frames(const BeamState &beam, Angle pol, Angle fun);

/// Ideal polarizer transmitting |u1^axis>, with `axis` measured from the
/// reference polarization basis. The frames of the beam are kept.
BeamState project_pol(const BeamState &beam, Angle axis);

/// Direct joint projection |<f_k^b|<u_j^a|e>|^2 for the normalized beam,
/// j, k in {1, 2}. Angles are absolute.
double joint_projection(const BeamState &beam, Angle a, Angle b, int j, int k);

} // namespace bellfield
