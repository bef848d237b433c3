#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "bellfield/angle.hpp"
#include "bellfield/field_core.hpp"

namespace bellfield {

/// Four joint projections P_jk(a, b).
struct ProjectionQuad {
  double p11 = 0.0;
  double p12 = 0.0;
  double p21 = 0.0;
  double p22 = 0.0;

  double sum() const { return p11 + p12 + p21 + p22; }
  double at(int j, int k) const;
  double &at(int j, int k);
};

struct BellSettings {
  Angle a;
  Angle a_prime;
  Angle b;
  Angle b_prime;
};

/// Correlation estimate; std_error is 0 on exact paths.
struct CorrelationValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// Any source of C(a, b): closed form, exact protocol, or Monte Carlo.
using CorrelationProvider = std::function<CorrelationValue(Angle a, Angle b)>;

struct BellResult {
  BellSettings settings;
  /// C(a,b), C(a',b), C(a,b'), C(a',b').
  std::array<double, 4> correlations{};
  std::array<double, 4> correlation_std_errors{};
  double value = 0.0;
  double std_error = 0.0;
};

/// p11 - p12 - p21 + p22.
double correlation_from_quad(const ProjectionQuad &q);

/// cos 2a cos 2b + 2 kappa1 kappa2 sin 2a sin 2b.
double correlation_analytic(Angle a, Angle b, const SchmidtPair &schmidt);

CorrelationProvider analytic_provider(const SchmidtPair &schmidt);

/// B = |C(a,b) - C(a',b) + C(a,b') + C(a',b')|, with the standard error
/// propagated in quadrature from the four correlations.
BellResult chsh(const BellSettings &settings, const CorrelationProvider &corr);

/// The kappa-expanded Bell parameter, which carries its minus sign on
/// C(a, b') instead of C(a', b):
///   |cos2a (cos2b - cos2b') + cos2a' (cos2b + cos2b')
///    + 2 k1 k2 (sin2a (sin2b - sin2b') + sin2a' (sin2b + sin2b'))|.
double bell_expanded(const BellSettings &settings, const SchmidtPair &schmidt);

/// Exchanges the roles of the two parties: (a, a', b, b') -> (b, b', a, a').
/// Since the closed-form C is symmetric, bell_expanded(s) equals
/// chsh(swap_parties(s)).
BellSettings swap_parties(const BellSettings &s);

/// 2 sqrt(1 + 4 kappa1^2 kappa2^2), the largest B reachable by the field.
double bell_ceiling(const SchmidtPair &schmidt);

struct OptimizerOptions {
  /// Coarse grid spacing over [0, pi) in each angle.
  double grid_step = pi / 36.0;
  /// Golden-section bracket width at which a line search stops.
  double angle_tolerance = 1e-9;
  /// A coordinate pass gaining less than this ends the refinement.
  double min_improvement = 1e-12;
  int max_passes = 500;
};

/// Deterministic maximization of chsh: exhaustive coarse grid, then cyclic
/// golden-section line searches over the four angles.
BellResult maximize_bell(const CorrelationProvider &corr, const OptimizerOptions &opts = {});
BellResult maximize_bell(const SchmidtPair &schmidt, const OptimizerOptions &opts = {});

/// Optimal settings in the Gisin form: a = 0, a' = pi/4, and b' = -b = beta
/// with cos 2 beta = 1 / sqrt(1 + 4 kappa1^2 kappa2^2). Throws
/// DegenerateConfiguration when kappa1 kappa2 = 0.
BellSettings gisin_settings(const SchmidtPair &schmidt);

struct ScanPoint {
  Angle a;
  Angle b;
  double correlation = 0.0;
  double std_error = 0.0;
};

/// C(a, b) over a grid of a at fixed b.
std::vector<ScanPoint> scan_correlation(Angle b, std::span<const Angle> a_grid,
                                        const CorrelationProvider &corr, unsigned workers = 1);

/// n equally spaced angles start, start + step, ...
std::vector<Angle> angle_grid(Angle start, double step, std::size_t n);

} // namespace bellfield
