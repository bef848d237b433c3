#include "bellfield/polarimetry.hpp"

#include <cmath>
#include <iostream>

#include "bellfield/errors.hpp"

namespace bellfield {

StokesVector StokesVector::normalized() const {
  if (!(s0 > 0.0))
    throw InvalidArgument("cannot normalize a Stokes vector with s0 <= 0");
  return {1.0, s1 / s0, s2 / s0, s3 / s0};
}

StokesVector stokes_from_coherence(const Eigen::Matrix2cd &j) {
  const double jxx = j(0, 0).real();
  const double jyy = j(1, 1).real();
  return {jxx + jyy, jxx - jyy, 2.0 * j(0, 1).real(), 2.0 * j(0, 1).imag()};
}

Eigen::Matrix2cd coherence_from_stokes(const StokesVector &s) {
  Eigen::Matrix2cd j;
  j(0, 0) = 0.5 * (s.s0 + s.s1);
  j(1, 1) = 0.5 * (s.s0 - s.s1);
  j(0, 1) = Complex(0.5 * s.s2, 0.5 * s.s3);
  j(1, 0) = std::conj(j(0, 1));
  return j;
}

StokesVector stokes_from_ensemble(const FieldEnsemble &e) {
  return stokes_from_coherence(coherence_matrix(e));
}

StokesEstimate stokes_estimate(const FieldEnsemble &e) {
  const auto &f = e.field();
  const Eigen::ArrayXd px = f.col(0).array().abs2();
  const Eigen::ArrayXd py = f.col(1).array().abs2();
  const Eigen::ArrayXcd cross = f.col(0).array() * f.col(1).array().conjugate();
  const std::array<Eigen::ArrayXd, 4> per_sample{px + py, px - py, 2.0 * cross.real(),
                                                 2.0 * cross.imag()};
  const auto n = static_cast<double>(f.rows());
  StokesEstimate out;
  out.samples = e.size();
  std::array<double, 4> mean{};
  for (std::size_t c = 0; c < 4; ++c) {
    mean[c] = per_sample[c].mean();
    const double var =
        f.rows() > 1 ? (per_sample[c] - mean[c]).square().sum() / (n - 1.0) : 0.0;
    out.std_error[c] = std::sqrt(var / n);
  }
  out.value = {mean[0], mean[1], mean[2], mean[3]};
  return out;
}

StokesVector stokes_of(const SchmidtPair &schmidt, double intensity) {
  return {intensity, intensity * schmidt.polarization(), 0.0, 0.0};
}

double dop(const StokesVector &s) {
  if (!(s.s0 > 0.0))
    throw InvalidArgument("degree of polarization needs s0 > 0");
  const double p = std::sqrt(s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3) / s.s0;
  if (p > 1.0) {
    std::clog << "warning: estimated degree of polarization " << p << " clipped to 1\n";
    return 1.0;
  }
  return p;
}

SchmidtPair schmidt_from_dop(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("degree of polarization must lie in [0, 1]");
  return {std::sqrt((1.0 + p) / 2.0), std::sqrt((1.0 - p) / 2.0)};
}

SchmidtFrame schmidt_frame(const Eigen::Matrix2cd &coherence) {
  const double trace = coherence.trace().real();
  if (!(trace > 0.0))
    throw InvalidArgument("coherence matrix has zero trace");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(coherence);
  const double lo = std::max(0.0, solver.eigenvalues()(0));
  const double hi = std::max(0.0, solver.eigenvalues()(1));
  if (hi - lo <= 1e-12 * trace)
    return {SchmidtPair::unpolarized(), Angle(0.0)};

  const double sum = hi + lo;
  SchmidtPair schmidt(std::sqrt(hi / sum), std::sqrt(lo / sum));

  Eigen::Vector2cd v = solver.eigenvectors().col(1);
  if (std::abs(v(0)) > 0.0)
    v *= std::polar(1.0, -std::arg(v(0)));
  else
    v *= std::polar(1.0, -std::arg(v(1)));
  // Circular content leaves an imaginary remainder; the orientation is taken
  // from the real parts.
  double theta = std::atan2(v(1).real(), v(0).real());
  if (theta > pi / 2.0)
    theta -= pi;
  else if (theta <= -pi / 2.0)
    theta += pi;
  return {schmidt, Angle(theta)};
}

SchmidtFrame schmidt_frame(const FieldEnsemble &e) { return schmidt_frame(coherence_matrix(e)); }

} // namespace bellfield
