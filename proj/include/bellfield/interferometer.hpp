#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <type_traits>

#include "bellfield/bell.hpp"
#include "bellfield/ensemble.hpp"
#include "bellfield/field_core.hpp"

namespace bellfield {

struct ShutterState {
  bool arm_primary_open = true;
  bool arm_auxiliary_open = true;

  static constexpr ShutterState both_open() { return {true, true}; }
  static constexpr ShutterState primary_only() { return {true, false}; }
  static constexpr ShutterState auxiliary_only() { return {false, true}; }
};

/// Multiplicative Gaussian noise on every detector reading.
struct DetectorModel {
  double relative_noise = 0.0;
  bool enabled = false;

  /// Throws InvalidArgument unless 0 <= relative_noise < 0.1.
  void validate() const;
  double read(double intensity, std::mt19937_64 &rng) const;
};

template <typename Beam>
struct SplitBeams {
  Beam primary;
  Beam auxiliary;
};

/// Beam of sampled field realizations; row t holds the (u1, u2) polarization
/// components of the field at sample t.
class SampledBeam {
public:
  SampledBeam() = default;
  explicit SampledBeam(SampleMatrix amplitudes) : amplitudes_(std::move(amplitudes)) {}

  static SampledBeam from_ensemble(const FieldEnsemble &e) { return SampledBeam(e.field()); }

  const SampleMatrix &amplitudes() const { return amplitudes_; }
  /// Mean power over all samples.
  double intensity() const;

private:
  SampleMatrix amplitudes_;
};

inline double intensity(const BeamState &beam) { return beam.intensity(); }
inline double intensity(const SampledBeam &beam) { return beam.intensity(); }

/// 50:50 beam splitter: each output carries half the power, the auxiliary one
/// picks up the factor i.
SplitBeams<BeamState> split(const BeamState &beam);
SplitBeams<SampledBeam> split(const SampledBeam &beam);

SampledBeam project_pol(const SampledBeam &beam, Angle axis);

/// Polarizer angle s with tan s = (kappa1 / kappa2) tan b, taken on the branch
/// within pi/2 of b so that s is continuous in b. Throws
/// DegenerateConfiguration for kappa2 = 0 with cos b = 0.
Angle stripping_angle(Angle b, const SchmidtPair &schmidt);

/// Stripping polarizer for function-space angle b. The symbolic result is
/// expressed in the function frame b, where its second column vanishes when
/// `schmidt` matches the beam.
BeamState strip(const BeamState &aux, Angle b, const SchmidtPair &schmidt);
SampledBeam strip(const SampledBeam &aux, Angle b, const SchmidtPair &schmidt);

/// Output port of the final 50:50 splitter, (aux + i e^{i phase_error} primary) / sqrt(2),
/// with closed arms contributing nothing. The symbolic result is expressed in
/// the frames of `primary`.
BeamState recombine(const BeamState &primary, const BeamState &aux, ShutterState shutters,
                    double phase_error = 0.0);
SampledBeam recombine(const SampledBeam &primary, const SampledBeam &aux, ShutterState shutters,
                      double phase_error = 0.0);

/// Intensities feeding the reconstruction of one joint projection.
///   total: I, the primary test beam entering analyzer a
///   arm:   I_1^a, primary arm after analyzer a (twice the primary-only reading)
///   aux:   Ibar_1^a, auxiliary arm after stripping and analyzer a (twice the
///          auxiliary-only reading)
///   out:   I_1^T, both shutters open
/// Power is a plain double for exact beams and a per-sample trace for
/// sampled ones.
template <typename Power>
struct BasicReadings {
  Power total{};
  Power arm{};
  Power aux{};
  Power out{};
};

using IntensityReadings = BasicReadings<double>;

/// Per-sample power |E(t)|^2 of a sampled beam.
Eigen::ArrayXd sample_power(const SampledBeam &beam);

/// Mean of the traces over rows [first, first + count).
IntensityReadings mean_readings(const BasicReadings<Eigen::ArrayXd> &traces, Eigen::Index first,
                                Eigen::Index count);

/// Below this fraction of `total` the auxiliary reading is treated as dark.
inline constexpr double dark_aux_fraction = 1e-12;

bool is_degenerate(const IntensityReadings &r);

/// P = (2 I_T - Ibar_a - I_a)^2 / (4 I Ibar_a). Throws DegenerateConfiguration
/// when the auxiliary arm is dark.
double reconstruct_projection(const IntensityReadings &r);

struct ProtocolOptions {
  /// Schmidt pair used to set the stripping polarizer; normally the
  /// tomography estimate rather than the true source value.
  SchmidtPair strip_schmidt = SchmidtPair::unpolarized();
  double phase_error = 0.0;
  DetectorModel detector{};
  /// Seed for detector noise; each (j, k) measurement uses its own sub-stream.
  std::uint64_t noise_seed = 0;
  /// Realization batches for the Monte Carlo standard error.
  std::size_t batches = 20;
};

/// Runs the interferometer for one analyzer angle and one function-space
/// angle on a source beam (pre-split) and returns the four noise-free
/// readings as measured by `meter`.
template <typename Beam, typename Meter>
auto run_protocol(const Beam &source, Angle analyzer, Angle b, const SchmidtPair &strip_schmidt,
                  double phase_error, Meter &&meter) {
  const auto beams = split(source);
  const Beam arm = project_pol(beams.primary, analyzer);
  const Beam aux = project_pol(strip(beams.auxiliary, b, strip_schmidt), analyzer);
  BasicReadings<std::decay_t<decltype(meter(beams.primary))>> r;
  r.total = meter(beams.primary);
  r.arm = 2.0 * meter(recombine(arm, aux, ShutterState::primary_only(), phase_error));
  r.aux = 2.0 * meter(recombine(arm, aux, ShutterState::auxiliary_only(), phase_error));
  r.out = meter(recombine(arm, aux, ShutterState::both_open(), phase_error));
  return r;
}

template <typename Beam>
IntensityReadings run_protocol(const Beam &source, Angle analyzer, Angle b,
                               const SchmidtPair &strip_schmidt, double phase_error) {
  return run_protocol(source, analyzer, b, strip_schmidt, phase_error,
                      [](const Beam &beam) { return intensity(beam); });
}

/// Applies detector noise to every reading.
IntensityReadings detect(const IntensityReadings &r, const DetectorModel &detector,
                         std::mt19937_64 &rng);

struct MeasuredProjection {
  double value = 0.0;
  double std_error = 0.0;
  IntensityReadings readings;
};

/// P_jk(a, b) from intensities alone: analyzer at a + (j-1) pi/2 in both
/// arms, stripping for b + (k-1) pi/2. The symbolic overload takes the
/// pre-split source beam; the ensemble overload runs the same protocol on
/// the sampled field and estimates the standard error from realization
/// batches.
MeasuredProjection measure_joint_projection(const BeamState &source, Angle a, Angle b, int j,
                                            int k, const ProtocolOptions &opts);
MeasuredProjection measure_joint_projection(const FieldEnsemble &source, Angle a, Angle b, int j,
                                            int k, const ProtocolOptions &opts);

struct MeasuredQuad {
  ProjectionQuad value;
  ProjectionQuad std_error;
  /// Readings of each P_jk, indexed 2 (j-1) + (k-1).
  std::array<IntensityReadings, 4> readings{};
  /// Entries whose auxiliary arm was dark and that were completed from the
  /// marginal P_j1 + P_j2 = I_j^a / I.
  std::array<bool, 4> from_marginal{};
  double correlation = 0.0;
  double correlation_std_error = 0.0;
};

MeasuredQuad measure_quad(const BeamState &source, Angle a, Angle b, const ProtocolOptions &opts);
MeasuredQuad measure_quad(const FieldEnsemble &source, Angle a, Angle b,
                          const ProtocolOptions &opts);

} // namespace bellfield
