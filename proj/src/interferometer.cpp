#include "bellfield/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bellfield/errors.hpp"

namespace bellfield {

namespace {

const Complex i_unit{0.0, 1.0};
const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

Angle analyzer_angle(Angle a, int j) { return a + static_cast<double>(j - 1) * quarter_turn; }
Angle function_angle(Angle b, int k) { return b + static_cast<double>(k - 1) * quarter_turn; }

void check_indices(int j, int k) {
  if (j < 1 || j > 2 || k < 1 || k > 2)
    throw InvalidArgument("projection indices must be 1 or 2");
}

std::size_t slot(int j, int k) { return static_cast<std::size_t>(2 * (j - 1) + (k - 1)); }

IntensityReadings with_noise(const IntensityReadings &r, const ProtocolOptions &opts,
                             std::size_t stream) {
  if (!opts.detector.enabled || opts.detector.relative_noise == 0.0)
    return r;
  std::mt19937_64 rng(substream_seed(opts.noise_seed, stream));
  return detect(r, opts.detector, rng);
}

template <typename Beam>
IntensityReadings readings_for(const Beam &source, Angle a, Angle b, int j, int k,
                               const ProtocolOptions &opts) {
  return run_protocol(source, analyzer_angle(a, j), function_angle(b, k), opts.strip_schmidt,
                      opts.phase_error);
}

/// Fills dark entries from the primary-arm marginal of the same analyzer row.
ProjectionQuad assemble_quad(const std::array<IntensityReadings, 4> &r,
                             const std::array<bool, 4> &dark) {
  ProjectionQuad q;
  for (int j = 1; j <= 2; ++j) {
    const std::size_t s1 = slot(j, 1), s2 = slot(j, 2);
    if (dark[s1] && dark[s2])
      throw DegenerateConfiguration(
          "both stripping settings extinguish the auxiliary arm for analyzer row " +
          std::to_string(j) + "; the field is (nearly) fully polarized");
    for (int k = 1; k <= 2; ++k) {
      const std::size_t own = slot(j, k);
      if (!dark[own])
        q.at(j, k) = reconstruct_projection(r[own]);
    }
    for (int k = 1; k <= 2; ++k) {
      const std::size_t own = slot(j, k);
      if (dark[own]) {
        const int other_k = 3 - k;
        const IntensityReadings &other = r[slot(j, other_k)];
        q.at(j, k) = other.arm / other.total - q.at(j, other_k);
      }
    }
  }
  return q;
}

double sample_std_error(const std::vector<double> &v) {
  if (v.size() < 2)
    return 0.0;
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  const auto n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

struct RowRange {
  Eigen::Index first;
  Eigen::Index count;
};

/// Contiguous, nearly equal realization batches as sample-row ranges.
std::vector<RowRange> batch_rows(const EnsembleParams &params, std::size_t wanted) {
  const std::size_t n = params.n_realizations;
  const std::size_t count = std::min(wanted, n);
  std::vector<RowRange> out;
  if (count < 2)
    return out;
  const auto per = static_cast<Eigen::Index>(params.samples_per_realization);
  Eigen::Index first = 0;
  for (std::size_t b = 0; b < count; ++b) {
    const auto size = static_cast<Eigen::Index>(n / count + (b < n % count ? 1 : 0)) * per;
    out.push_back({first, size});
    first += size;
  }
  return out;
}

using Traces = BasicReadings<Eigen::ArrayXd>;

/// Per-sample readings, computed over cache-sized row blocks.
Traces sampled_traces(const FieldEnsemble &source, Angle a, Angle b, int j, int k,
                      const ProtocolOptions &opts) {
  constexpr Eigen::Index block = 4096;
  const Eigen::Index rows = source.field().rows();
  Traces out{Eigen::ArrayXd(rows), Eigen::ArrayXd(rows), Eigen::ArrayXd(rows),
             Eigen::ArrayXd(rows)};
  for (Eigen::Index first = 0; first < rows; first += block) {
    const Eigen::Index n = std::min(block, rows - first);
    const Traces t = run_protocol(SampledBeam(source.field().middleRows(first, n)),
                                  analyzer_angle(a, j), function_angle(b, k), opts.strip_schmidt,
                                  opts.phase_error,
                                  [](const SampledBeam &beam) { return sample_power(beam); });
    out.total.segment(first, n) = t.total;
    out.arm.segment(first, n) = t.arm;
    out.aux.segment(first, n) = t.aux;
    out.out.segment(first, n) = t.out;
  }
  return out;
}

} // namespace

void DetectorModel::validate() const {
  if (!(relative_noise >= 0.0) || !(relative_noise < 0.1))
    throw InvalidArgument("detector relative noise must lie in [0, 0.1)");
}

double DetectorModel::read(double value, std::mt19937_64 &rng) const {
  if (!enabled || relative_noise == 0.0)
    return value;
  std::normal_distribution<double> normal(0.0, relative_noise);
  return value * (1.0 + normal(rng));
}

double SampledBeam::intensity() const {
  if (amplitudes_.rows() == 0)
    return 0.0;
  return amplitudes_.rowwise().squaredNorm().mean();
}

Eigen::ArrayXd sample_power(const SampledBeam &beam) {
  return beam.amplitudes().rowwise().squaredNorm().array();
}

IntensityReadings mean_readings(const BasicReadings<Eigen::ArrayXd> &t, Eigen::Index first,
                                Eigen::Index count) {
  return {t.total.segment(first, count).mean(), t.arm.segment(first, count).mean(),
          t.aux.segment(first, count).mean(), t.out.segment(first, count).mean()};
}

SplitBeams<BeamState> split(const BeamState &beam) {
  BeamState primary = beam;
  primary.coeffs *= inv_sqrt2;
  BeamState aux = primary;
  aux.global_phase *= i_unit;
  return {primary, aux};
}

SplitBeams<SampledBeam> split(const SampledBeam &beam) {
  return {SampledBeam(beam.amplitudes() * inv_sqrt2),
          SampledBeam(beam.amplitudes() * (i_unit * inv_sqrt2))};
}

SampledBeam project_pol(const SampledBeam &beam, Angle axis) {
  // Rows are amplitudes; the projector is real symmetric, so only the
  // component along the axis survives.
  const Eigen::Vector2d u = analyzer_axis(axis);
  const Eigen::VectorXcd along = beam.amplitudes().col(0) * u(0) + beam.amplitudes().col(1) * u(1);
  SampleMatrix out(along.size(), 2);
  out.col(0) = along * u(0);
  out.col(1) = along * u(1);
  return SampledBeam(std::move(out));
}

Angle stripping_angle(Angle b, const SchmidtPair &schmidt) {
  if (schmidt.kappa2() == 0.0 && std::abs(b.cos()) < 1e-12)
    throw DegenerateConfiguration(
        "stripping angle undefined: fully polarized field with cos b = 0");
  const double raw = std::atan2(schmidt.kappa1() * b.sin(), schmidt.kappa2() * b.cos());
  return Angle(b.rad() + std::remainder(raw - b.rad(), 2.0 * pi));
}

BeamState strip(const BeamState &aux, Angle b, const SchmidtPair &schmidt) {
  const Angle s = stripping_angle(b, schmidt);
  return project_pol(to_frames(aux, aux.pol_frame, b), s);
}

SampledBeam strip(const SampledBeam &aux, Angle b, const SchmidtPair &schmidt) {
  return project_pol(aux, stripping_angle(b, schmidt));
}

BeamState recombine(const BeamState &primary, const BeamState &aux, ShutterState shutters,
                    double phase_error) {
  const double ref = primary.reference_intensity > 0.0 ? primary.reference_intensity
                                                       : aux.reference_intensity;
  BeamState out;
  out.reference_intensity = ref;
  out.pol_frame = primary.pol_frame;
  out.fun_frame = primary.fun_frame;
  if (ref <= 0.0)
    return out;
  Eigen::Matrix2cd amp = Eigen::Matrix2cd::Zero();
  if (shutters.arm_auxiliary_open) {
    const BeamState aligned = to_frames(aux, primary.pol_frame, primary.fun_frame);
    amp += std::sqrt(aux.reference_intensity / ref) * aligned.amplitude();
  }
  if (shutters.arm_primary_open)
    amp += std::sqrt(primary.reference_intensity / ref) * i_unit * std::polar(1.0, phase_error) *
           primary.amplitude();
  out.coeffs = amp * inv_sqrt2;
  return out;
}

SampledBeam recombine(const SampledBeam &primary, const SampledBeam &aux, ShutterState shutters,
                      double phase_error) {
  if (primary.amplitudes().rows() != aux.amplitudes().rows())
    throw InvalidArgument("recombined beams must carry the same samples");
  SampleMatrix amp = SampleMatrix::Zero(primary.amplitudes().rows(), 2);
  if (shutters.arm_auxiliary_open)
    amp += aux.amplitudes();
  if (shutters.arm_primary_open)
    amp += (i_unit * std::polar(1.0, phase_error)) * primary.amplitudes();
  return SampledBeam(amp * inv_sqrt2);
}

bool is_degenerate(const IntensityReadings &r) {
  return !(r.total > 0.0) || !(r.aux > dark_aux_fraction * r.total);
}

double reconstruct_projection(const IntensityReadings &r) {
  if (is_degenerate(r))
    throw DegenerateConfiguration(
        "auxiliary arm is dark behind the analyzer; the joint projection cannot be "
        "reconstructed from intensities at this setting");
  const double d = 2.0 * r.out - r.aux - r.arm;
  return d * d / (4.0 * r.total * r.aux);
}

IntensityReadings detect(const IntensityReadings &r, const DetectorModel &detector,
                         std::mt19937_64 &rng) {
  detector.validate();
  IntensityReadings out;
  out.total = detector.read(r.total, rng);
  out.arm = detector.read(r.arm, rng);
  out.aux = detector.read(r.aux, rng);
  out.out = detector.read(r.out, rng);
  return out;
}

MeasuredProjection measure_joint_projection(const BeamState &source, Angle a, Angle b, int j,
                                            int k, const ProtocolOptions &opts) {
  check_indices(j, k);
  const IntensityReadings r =
      with_noise(readings_for(source, a, b, j, k, opts), opts, slot(j, k));
  return {reconstruct_projection(r), 0.0, r};
}

MeasuredProjection measure_joint_projection(const FieldEnsemble &source, Angle a, Angle b, int j,
                                            int k, const ProtocolOptions &opts) {
  check_indices(j, k);
  const Traces traces = sampled_traces(source, a, b, j, k, opts);
  const auto rows = static_cast<Eigen::Index>(source.size());
  const IntensityReadings r = with_noise(mean_readings(traces, 0, rows), opts, slot(j, k));
  MeasuredProjection m{reconstruct_projection(r), 0.0, r};
  std::vector<double> per_batch;
  for (const RowRange &range : batch_rows(source.params(), opts.batches))
    per_batch.push_back(reconstruct_projection(mean_readings(traces, range.first, range.count)));
  m.std_error = sample_std_error(per_batch);
  return m;
}

namespace {

MeasuredQuad finish_quad(const std::array<IntensityReadings, 4> &clean, const ProtocolOptions &opts,
                         std::array<bool, 4> &dark) {
  MeasuredQuad m;
  for (std::size_t s = 0; s < 4; ++s) {
    dark[s] = is_degenerate(clean[s]);
    m.readings[s] = with_noise(clean[s], opts, s);
  }
  m.from_marginal = dark;
  m.value = assemble_quad(m.readings, dark);
  m.correlation = correlation_from_quad(m.value);
  return m;
}

} // namespace

MeasuredQuad measure_quad(const BeamState &source, Angle a, Angle b, const ProtocolOptions &opts) {
  std::array<IntensityReadings, 4> clean;
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k)
      clean[slot(j, k)] = readings_for(source, a, b, j, k, opts);
  std::array<bool, 4> dark{};
  return finish_quad(clean, opts, dark);
}

MeasuredQuad measure_quad(const FieldEnsemble &source, Angle a, Angle b,
                          const ProtocolOptions &opts) {
  std::array<Traces, 4> traces;
  std::array<IntensityReadings, 4> clean;
  const auto rows = static_cast<Eigen::Index>(source.size());
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k) {
      traces[slot(j, k)] = sampled_traces(source, a, b, j, k, opts);
      clean[slot(j, k)] = mean_readings(traces[slot(j, k)], 0, rows);
    }
  std::array<bool, 4> dark{};
  MeasuredQuad m = finish_quad(clean, opts, dark);

  const auto ranges = batch_rows(source.params(), opts.batches);
  if (ranges.empty())
    return m;
  std::array<std::vector<double>, 4> p;
  std::vector<double> c;
  for (const RowRange &range : ranges) {
    std::array<IntensityReadings, 4> batch;
    for (std::size_t s = 0; s < 4; ++s)
      batch[s] = mean_readings(traces[s], range.first, range.count);
    const ProjectionQuad q = assemble_quad(batch, dark);
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k)
        p[slot(j, k)].push_back(q.at(j, k));
    c.push_back(correlation_from_quad(q));
  }
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k)
      m.std_error.at(j, k) = sample_std_error(p[slot(j, k)]);
  m.correlation_std_error = sample_std_error(c);
  return m;
}

} // namespace bellfield
