#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bellfield/bell.hpp"
#include "bellfield/ensemble.hpp"
#include "bellfield/interferometer.hpp"
#include "bellfield/polarimetry.hpp"

namespace bellfield {

/// Stable 64-bit key of an (a, b) setting, used to pick the ensemble and
/// detector-noise sub-streams of a measurement independently of the order in
/// which settings are visited.
std::uint64_t setting_key(Angle a, Angle b);

/// C(a, b) from the intensity protocol on the exact two-party beam.
CorrelationProvider symbolic_protocol_provider(const SchmidtPair &source, double intensity,
                                               const ProtocolOptions &opts);

/// C(a, b) from the intensity protocol on a fresh seeded ensemble per setting.
/// `params.seed` is the master seed.
CorrelationProvider monte_carlo_protocol_provider(const SchmidtPair &source, double intensity,
                                                  const EnsembleParams &params,
                                                  const ProtocolOptions &opts);

/// C(a, b) from direct joint projections of one shared ensemble, using the
/// sampled basis processes. Works for separable fields, where stripping is
/// impossible.
CorrelationProvider monte_carlo_projection_provider(std::shared_ptr<const FieldEnsemble> ensemble,
                                                    std::size_t batches = 20);

/// Direct joint projections P_jk(a, b) estimated from the samples.
ProjectionQuad empirical_quad(const FieldEnsemble &e, Angle a, Angle b);

struct ExperimentConfig {
  SchmidtPair source = SchmidtPair::unpolarized();
  double intensity = 1.0;
  EnsembleParams params{};
  DetectorModel detector{};
  double phase_error = 0.0;
  unsigned workers = 1;
};

struct Calibration {
  StokesEstimate stokes;
  double dop = 0.0;
  SchmidtPair schmidt = SchmidtPair::unpolarized();
  Angle frame{};
};

/// Tomography on a dedicated ensemble (sub-stream 0 of the master seed).
Calibration calibrate(const ExperimentConfig &cfg);

struct ExperimentRecord {
  Angle a;
  Angle b;
  int j = 1;
  int k = 1;
  IntensityReadings readings;
  double projection = 0.0;
};

struct ExperimentRun {
  Calibration calibration;
  std::vector<ExperimentRecord> records;
  /// One per requested setting, in request order.
  std::vector<CorrelationValue> correlations;
};

/// The calibrated experiment: stripping uses the tomography estimate, every
/// setting is measured on its own ensemble, and records come out in request
/// order whatever the worker count.
ExperimentRun simulate_experiment(const ExperimentConfig &cfg,
                                  const std::vector<std::pair<Angle, Angle>> &settings);

/// Settings list (a,b), (a',b), (a,b'), (a',b') for chsh.
std::vector<std::pair<Angle, Angle>> chsh_pairs(const BellSettings &s);

/// B from the four correlations of chsh_pairs order.
BellResult bell_from_correlations(const BellSettings &s,
                                  const std::vector<CorrelationValue> &c);

} // namespace bellfield
