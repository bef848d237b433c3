#include "bellfield/experiment.hpp"

#include <bit>
#include <cmath>

#include "bellfield/errors.hpp"
#include "bellfield/parallel.hpp"

namespace bellfield {

std::uint64_t setting_key(Angle a, Angle b) {
  return substream_seed(std::bit_cast<std::uint64_t>(a.rad()),
                        std::bit_cast<std::uint64_t>(b.rad()));
}

namespace {

ProtocolOptions for_setting(const ProtocolOptions &opts, Angle a, Angle b) {
  ProtocolOptions o = opts;
  o.noise_seed = substream_seed(opts.noise_seed, setting_key(a, b));
  return o;
}

/// G(k, j) = <f_k* E_j>, the sample cross moments needed for direct
/// projections.
using ProjectionMoments = Eigen::Matrix2cd;

ProjectionMoments moments_of(const FieldEnsemble &e) {
  return (e.processes().adjoint() * e.field()) / static_cast<double>(e.size());
}

/// Normalized by the total projected power: the sampled f1, f2 are only
/// approximately orthonormal, so the mean field power would leave the quad
/// off unity by O(1/sqrt(N)).
ProjectionQuad quad_from_moments(const ProjectionMoments &m, Angle a, Angle b) {
  // A(k, j) = <f_k^b* <u_j^a|E>>
  const Eigen::Matrix2cd amp = rotation<Complex>(b) * m * rotation<Complex>(a).transpose();
  const double total = amp.squaredNorm();
  if (!(total > 0.0))
    throw DegenerateConfiguration("ensemble carries no power");
  ProjectionQuad q;
  for (int j = 1; j <= 2; ++j)
    for (int k = 1; k <= 2; ++k)
      q.at(j, k) = std::norm(amp(k - 1, j - 1)) / total;
  return q;
}

} // namespace

CorrelationProvider symbolic_protocol_provider(const SchmidtPair &source, double intensity,
                                               const ProtocolOptions &opts) {
  opts.detector.validate();
  const BeamState beam = BeamState::schmidt_source(source, intensity);
  return [beam, opts](Angle a, Angle b) {
    const MeasuredQuad q = measure_quad(beam, a, b, for_setting(opts, a, b));
    return CorrelationValue{q.correlation, 0.0};
  };
}

CorrelationProvider monte_carlo_protocol_provider(const SchmidtPair &source, double intensity,
                                                  const EnsembleParams &params,
                                                  const ProtocolOptions &opts) {
  opts.detector.validate();
  return [source, intensity, params, opts](Angle a, Angle b) {
    EnsembleParams p = params;
    p.seed = substream_seed(params.seed, setting_key(a, b));
    const FieldEnsemble e = generate(source, intensity, p);
    const MeasuredQuad q = measure_quad(e, a, b, for_setting(opts, a, b));
    return CorrelationValue{q.correlation, q.correlation_std_error};
  };
}

ProjectionQuad empirical_quad(const FieldEnsemble &e, Angle a, Angle b) {
  return quad_from_moments(moments_of(e), a, b);
}

CorrelationProvider monte_carlo_projection_provider(std::shared_ptr<const FieldEnsemble> ensemble,
                                                    std::size_t batches) {
  if (!ensemble)
    throw InvalidArgument("projection provider needs an ensemble");
  auto full = std::make_shared<ProjectionMoments>(moments_of(*ensemble));
  auto per_batch = std::make_shared<std::vector<ProjectionMoments>>();
  const std::size_t n = ensemble->params().n_realizations;
  const std::size_t count = std::min(batches, n);
  if (count >= 2) {
    std::size_t first = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t size = n / count + (i < n % count ? 1 : 0);
      per_batch->push_back(moments_of(ensemble->slice(first, size)));
      first += size;
    }
  }
  return [full, per_batch](Angle a, Angle b) {
    CorrelationValue c{correlation_from_quad(quad_from_moments(*full, a, b)), 0.0};
    if (per_batch->size() >= 2) {
      const auto m = static_cast<double>(per_batch->size());
      double sum = 0.0, sum2 = 0.0;
      for (const auto &moments : *per_batch) {
        const double v = correlation_from_quad(quad_from_moments(moments, a, b));
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / m;
      const double var = std::max(0.0, (sum2 - m * mean * mean) / (m - 1.0));
      c.std_error = std::sqrt(var / m);
    }
    return c;
  };
}

Calibration calibrate(const ExperimentConfig &cfg) {
  EnsembleParams p = cfg.params;
  p.seed = substream_seed(cfg.params.seed, 0);
  const FieldEnsemble e = generate(cfg.source, cfg.intensity, p, cfg.workers);
  Calibration c;
  c.stokes = stokes_estimate(e);
  c.dop = dop(c.stokes.value);
  c.schmidt = schmidt_from_dop(c.dop);
  c.frame = schmidt_frame(e).rotation;
  return c;
}

ExperimentRun simulate_experiment(const ExperimentConfig &cfg,
                                  const std::vector<std::pair<Angle, Angle>> &settings) {
  cfg.detector.validate();
  ExperimentRun run;
  run.calibration = calibrate(cfg);

  ProtocolOptions opts;
  opts.strip_schmidt = run.calibration.schmidt;
  opts.phase_error = cfg.phase_error;
  opts.detector = cfg.detector;
  opts.noise_seed = substream_seed(cfg.params.seed, 1);

  std::vector<MeasuredQuad> quads(settings.size());
  parallel_for(settings.size(), cfg.workers, [&](std::size_t i) {
    const auto [a, b] = settings[i];
    EnsembleParams p = cfg.params;
    p.seed = substream_seed(cfg.params.seed, setting_key(a, b));
    const FieldEnsemble e = generate(cfg.source, cfg.intensity, p);
    quads[i] = measure_quad(e, a, b, for_setting(opts, a, b));
  });

  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto [a, b] = settings[i];
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 2; ++k)
        run.records.push_back(
            {a, b, j, k, quads[i].readings[2 * (j - 1) + (k - 1)], quads[i].value.at(j, k)});
    run.correlations.push_back({quads[i].correlation, quads[i].correlation_std_error});
  }
  return run;
}

std::vector<std::pair<Angle, Angle>> chsh_pairs(const BellSettings &s) {
  return {{s.a, s.b}, {s.a_prime, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b_prime}};
}

BellResult bell_from_correlations(const BellSettings &s, const std::vector<CorrelationValue> &c) {
  if (c.size() != 4)
    throw InvalidArgument("Bell parameter needs exactly four correlations");
  std::size_t next = 0;
  return chsh(s, [&c, &next](Angle, Angle) { return c[next++]; });
}

} // namespace bellfield
