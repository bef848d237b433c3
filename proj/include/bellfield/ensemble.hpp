#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "bellfield/field_core.hpp"

namespace bellfield {

/// N x 2 complex samples; column 0/1 are the two polarization (or basis
/// process) components.
using SampleMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, 2>;

struct EnsembleParams {
  std::size_t n_realizations = 10000;
  std::size_t samples_per_realization = 16;
  std::uint64_t seed = 0;

  std::size_t total_samples() const { return n_realizations * samples_per_realization; }
};

/// Counter-based sub-stream seed: splitmix64 applied to seed ^ mix(index).
/// Realization r of an ensemble is drawn from substream_seed(seed, r), so the
/// data do not depend on how realizations are scheduled.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded realizations of the two unit-power basis processes f1(t), f2(t) and
/// the field they build in the Schmidt polarization frame,
///   E_x = sqrt(I) kappa1 f1,   E_y = sqrt(I) kappa2 f2.
/// Rows are ordered realization-major.
class FieldEnsemble {
public:
  FieldEnsemble(EnsembleParams params, SchmidtPair schmidt, double intensity,
                SampleMatrix processes);

  const EnsembleParams &params() const { return params_; }
  const SchmidtPair &schmidt() const { return schmidt_; }
  double intensity() const { return intensity_; }

  /// Columns f1, f2.
  const SampleMatrix &processes() const { return processes_; }
  /// Columns E_x, E_y.
  const SampleMatrix &field() const { return field_; }

  std::size_t size() const { return static_cast<std::size_t>(field_.rows()); }

  /// Contiguous block of realizations [first, first + count).
  FieldEnsemble slice(std::size_t first, std::size_t count) const;

private:
  EnsembleParams params_;
  SchmidtPair schmidt_;
  double intensity_;
  SampleMatrix processes_;
  SampleMatrix field_;
};

/// Draws f1, f2 as independent circular complex Gaussian white processes with
/// <|f|^2> = 1. Bit-identical output for any `workers`.
FieldEnsemble generate(const SchmidtPair &schmidt, double intensity, const EnsembleParams &params,
                       unsigned workers = 1);

enum class Axis { x = 0, y = 1 };

/// Sample mean with its standard error, sigma = sqrt(var / N), where var is
/// the sample variance of |z - mean|^2.
struct ComplexEstimate {
  Complex value;
  double std_error = 0.0;
};

/// Mean of conj(g1) * g2 with its standard error.
ComplexEstimate inner_estimate(const Eigen::Ref<const Eigen::VectorXcd> &g1,
                               const Eigen::Ref<const Eigen::VectorXcd> &g2);

/// Sample average of E_i(t) conj(E_j(t)).
Complex empirical_correlator(const FieldEnsemble &e, Axis i, Axis j);
ComplexEstimate correlator_estimate(const FieldEnsemble &e, Axis i, Axis j);

/// J(i, j) = <E_i E_j*>.
Eigen::Matrix2cd coherence_matrix(const FieldEnsemble &e);

/// Samples of the rotated basis process named by `label`.
Eigen::VectorXcd basis_process(const FieldEnsemble &e, const FunBasisLabel &label);

/// <label1|label2> in the sample inner product, mean of conj(g1) g2.
Complex empirical_fun_inner(const FieldEnsemble &e, const FunBasisLabel &label1,
                            const FunBasisLabel &label2);
ComplexEstimate fun_inner_estimate(const FieldEnsemble &e, const FunBasisLabel &label1,
                                   const FunBasisLabel &label2);

/// One line per sample: re_Ex im_Ex re_Ey im_Ey.
void write_samples(std::ostream &os, const FieldEnsemble &e);

} // namespace bellfield
