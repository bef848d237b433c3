#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "bellfield/ensemble.hpp"
#include "bellfield/field_core.hpp"

namespace bellfield {

/// Stokes parameters. Convention, with J(i, j) = <E_i E_j*>:
///   S0 = J_xx + J_yy,  S1 = J_xx - J_yy,  S2 = 2 Re J_xy,  S3 = 2 Im J_xy.
struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  /// Divides every component by s0.
  StokesVector normalized() const;
};

struct StokesEstimate {
  StokesVector value;
  std::array<double, 4> std_error{};
  std::size_t samples = 0;
};

StokesVector stokes_from_coherence(const Eigen::Matrix2cd &coherence);

/// Inverse of stokes_from_coherence.
Eigen::Matrix2cd coherence_from_stokes(const StokesVector &s);

StokesVector stokes_from_ensemble(const FieldEnsemble &e);

/// Stokes vector with per-component standard errors from the per-sample
/// variance.
StokesEstimate stokes_estimate(const FieldEnsemble &e);

/// Noise-free Stokes vector of the Schmidt-frame field.
StokesVector stokes_of(const SchmidtPair &schmidt, double intensity = 1.0);

/// sqrt(s1^2 + s2^2 + s3^2) / s0, clipped to [0, 1]. Values above 1 only come
/// from sampling noise and are reported on std::clog. Throws for s0 <= 0.
double dop(const StokesVector &s);

/// kappa = (sqrt((1 + p) / 2), sqrt((1 - p) / 2)). Throws outside [0, 1].
SchmidtPair schmidt_from_dop(double p);

struct SchmidtFrame {
  SchmidtPair schmidt;
  /// Orientation of the major axis, counter-clockwise from |u1>, in
  /// (-pi/2, pi/2]. The analyzer angle selecting it is -rotation.
  Angle rotation;
};

/// Diagonalizes a Hermitian positive semidefinite coherence matrix:
/// kappa_i = sqrt(lambda_i / trace). Degenerate eigenvalues give rotation 0
/// and kappa1 = kappa2. Throws for zero trace.
SchmidtFrame schmidt_frame(const Eigen::Matrix2cd &coherence);
SchmidtFrame schmidt_frame(const FieldEnsemble &e);

} // namespace bellfield
