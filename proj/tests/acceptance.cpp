// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bellfield/errors.hpp"
#include "bellfield/experiment.hpp"
#include "cli.hpp"

using namespace bellfield;

namespace {

constexpr double tsirelson = 2.8284271247461903;

namespace tol {
constexpr double analytic_bell = 1e-6;
constexpr double max_sigma = 0.01;
constexpr double runtime_c1 = 10.0;
constexpr double paper_max = 2.8164;
constexpr double paper_max_tol = 1e-4;
constexpr double paper_printed = 2.817;
constexpr double paper_printed_tol = 5e-4;
constexpr double dop = 5e-4;
constexpr double kappa = 1e-3;
constexpr double classical_symbolic = 1e-9;
constexpr double oracle = 1e-10;
constexpr double runtime_c5 = 5.0;
constexpr double scan_analytic = 1e-12;
constexpr double sigmas = 3.0;
constexpr double noisy_low = 2.0;
constexpr double noisy_high = 2.82;
constexpr double noise_free = 1e-6;
constexpr double unitarity = 1e-14;
constexpr double quad_sum = 1e-12;
constexpr double stripped = 1e-14;
constexpr double gisin = 1e-6;
} // namespace tol

int failures = 0;

void report(int id, const std::string &name, bool pass, const std::string &detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Angle uniform_angle(std::mt19937_64 &rng) {
  return Angle(std::uniform_real_distribution<double>(-pi, pi)(rng));
}

SchmidtPair random_entangled(std::mt19937_64 &rng) {
  return schmidt_from_dop(std::uniform_real_distribution<double>(0.0, 0.95)(rng));
}

double projection_oracle(const SchmidtPair &k, Angle a, Angle b, int j, int kk) {
  const double aj = a.rad() + (j - 1) * pi / 2.0, bk = b.rad() + (kk - 1) * pi / 2.0;
  const double amp = k.kappa1() * std::cos(aj) * std::cos(bk) + k.kappa2() * std::sin(aj) * std::sin(bk);
  return amp * amp;
}

void tsirelson_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code = cli::run_cli({"bell", "--maximize", "--dop", "0"}, out, err);
  double analytic = std::nan("");
  std::istringstream lines(out.str());
  std::string header, row;
  if (code == 0 && std::getline(lines, header) && std::getline(lines, row)) {
    std::istringstream cells(row);
    std::string cell;
    for (int i = 0; i <= 8 && std::getline(cells, cell, ','); ++i)
      if (i == 8)
        analytic = std::stod(cell);
  }

  const SchmidtPair k = SchmidtPair::unpolarized();
  const BellSettings best = maximize_bell(k).settings;
  ProtocolOptions opts;
  opts.strip_schmidt = k;
  const EnsembleParams params{10000, 16, 1};
  const BellResult mc = chsh(best, monte_carlo_protocol_provider(k, 1.0, params, opts));
  const double elapsed = seconds_since(t0);

  const bool ok_analytic = std::abs(analytic - tsirelson) <= tol::analytic_bell;
  const bool ok_mc = std::abs(mc.value - tsirelson) <= tol::sigmas * mc.std_error &&
                     mc.std_error <= tol::max_sigma;
  report(1, "Tsirelson recovery", code == 0 && ok_analytic && ok_mc && elapsed < tol::runtime_c1,
         fmt("cli B = %.9f (|dB| %.1e <= %.0e); MC protocol N = 1e4x16 B = %.6f +- %.6f "
             "(|dB| = %.2f sigma, sigma <= %.2f); %.2f s < %.0f s",
             analytic, std::abs(analytic - tsirelson), tol::analytic_bell, mc.value, mc.std_error,
             std::abs(mc.value - tsirelson) / mc.std_error, tol::max_sigma, elapsed,
             tol::runtime_c1));
}

double paper_field_maximum() {
  return maximize_bell(schmidt_from_dop(0.125)).value;
}

void paper_field() {
  const SchmidtPair k = schmidt_from_dop(0.125);
  const double b = paper_field_maximum();
  const bool strict = std::abs(b - tol::paper_max) <= tol::paper_max_tol;
  const bool printed = std::abs(b - tol::paper_printed) <= tol::paper_printed_tol;
  report(2, "Paper field maximum", strict,
         fmt("DOP 0.125 -> kappa (%.6f, %.6f), maximize_bell B = %.6f; target %.4f +- %.0e "
             "(|dB| = %.2e); printed value %.3f matched to +- %.0e: %s",
             k.kappa1(), k.kappa2(), b, tol::paper_max, tol::paper_max_tol,
             std::abs(b - tol::paper_max), tol::paper_printed, tol::paper_printed_tol,
             printed ? "yes" : "no"));
}

void tomography_chain() {
  const StokesVector s{1.0, -0.0827, -0.0920, -0.0158};
  const double p = dop(s);
  const SchmidtPair k = schmidt_from_dop(p);
  const bool ok = std::abs(p - 0.125) <= tol::dop && std::abs(k.kappa1() - 0.750) <= tol::kappa &&
                  std::abs(k.kappa2() - 0.661) <= tol::kappa;
  report(3, "Tomography chain", ok,
         fmt("DOP = %.6f (0.125 +- %.0e), kappa = (%.6f, %.6f) ((0.750, 0.661) +- %.0e)", p, tol::dop,
             k.kappa1(), k.kappa2(), tol::kappa));
}

void classical_bound() {
  const SchmidtPair k(1.0, 0.0);
  ProtocolOptions opts;
  opts.strip_schmidt = k;
  // Stripping is impossible for a separable field, so the intensity protocol
  // is degenerate here; the exact path uses direct projections of the beam.
  const CorrelationProvider protocol = symbolic_protocol_provider(k, 1.0, opts);
  const BeamState beam = BeamState::schmidt_source(k, 1.0);
  const CorrelationProvider symbolic = [&beam](Angle a, Angle b) {
    ProjectionQuad q;
    for (int j = 1; j <= 2; ++j)
      for (int kk = 1; kk <= 2; ++kk)
        q.at(j, kk) = joint_projection(beam, a, b, j, kk);
    return CorrelationValue{correlation_from_quad(q), 0.0};
  };
  auto ensemble = std::make_shared<const FieldEnsemble>(generate(k, 1.0, {10000, 16, 4}));
  const CorrelationProvider mc = monte_carlo_projection_provider(ensemble);

  std::mt19937_64 rng(404);
  constexpr int draws = 10000;
  double worst_symbolic = 0.0, worst_mc_sigma = -1e300, worst_mc = 0.0;
  int degenerate = 0, symbolic_over = 0, mc_over = 0;
  for (int i = 0; i < draws; ++i) {
    const BellSettings s{uniform_angle(rng), uniform_angle(rng), uniform_angle(rng),
                         uniform_angle(rng)};
    const double b = chsh(s, symbolic).value;
    worst_symbolic = std::max(worst_symbolic, b);
    symbolic_over += b > 2.0 + tol::classical_symbolic;
    if (i < 100) {
      try {
        chsh(s, protocol);
      } catch (const DegenerateConfiguration &) {
        ++degenerate;
      }
    }
    const BellResult r = chsh(s, mc);
    worst_mc = std::max(worst_mc, r.value);
    if (r.value > 2.0) {
      const double z = (r.value - 2.0) / r.std_error;
      worst_mc_sigma = std::max(worst_mc_sigma, z);
      mc_over += z > tol::sigmas;
    }
  }
  report(4, "Classical bound", symbolic_over == 0 && mc_over == 0,
         fmt("kappa = (1, 0), %d random settings: exact projections max B = %.12f "
             "(%d above 2 + %.0e); MC projections max B = %.6f (%d above 2 + %.0f sigma); "
             "intensity protocol reports degenerate stripping for %d of 100",
             draws, worst_symbolic, symbolic_over, tol::classical_symbolic, worst_mc, mc_over,
             tol::sigmas, degenerate));
}

void protocol_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> dops{0.0, 0.125, 0.3, 0.6, 0.9};
  const std::vector<Angle> grid = angle_grid(Angle(0.0), pi / 12.0, 12);
  double worst = 0.0, worst_oracle = 0.0;
  int marginal = 0, compared = 0;
  for (double p : dops) {
    const SchmidtPair k = schmidt_from_dop(p);
    const BeamState src = BeamState::schmidt_source(k, 1.0);
    ProtocolOptions opts;
    opts.strip_schmidt = k;
    for (Angle a : grid)
      for (Angle b : grid) {
        const MeasuredQuad q = measure_quad(src, a, b, opts);
        for (int j = 1; j <= 2; ++j)
          for (int kk = 1; kk <= 2; ++kk) {
            const double direct = joint_projection(src, a, b, j, kk);
            worst = std::max(worst, std::abs(q.value.at(j, kk) - direct));
            worst_oracle = std::max(worst_oracle,
                                    std::abs(q.value.at(j, kk) - projection_oracle(k, a, b, j, kk)));
            marginal += q.from_marginal[2 * (j - 1) + (kk - 1)];
            ++compared;
          }
      }
  }
  const double elapsed = seconds_since(t0);
  report(5, "Protocol-oracle equivalence",
         worst <= tol::oracle && worst_oracle <= tol::oracle && elapsed < tol::runtime_c5,
         fmt("12x12 grid x 5 kappa, %d projections: max |P_protocol - P_direct| = %.2e, "
             "vs closed form %.2e (<= %.0e; %d dark-arm entries from marginals); %.2f s < %.0f s",
             compared, worst, worst_oracle, tol::oracle, marginal, elapsed, tol::runtime_c5));
}

void scan_shape() {
  const SchmidtPair k = SchmidtPair::unpolarized();
  const std::vector<Angle> bs = angle_grid(Angle(0.1), pi / 4.0, 4);

  double worst_analytic = 0.0;
  const std::vector<Angle> fine = angle_grid(Angle(0.0), pi / 36.0, 37);
  auto ensemble = std::make_shared<const FieldEnsemble>(generate(k, 1.0, {10000, 16, 6}));
  const CorrelationProvider projections = monte_carlo_projection_provider(ensemble);
  double worst_projection = 0.0;
  for (Angle b : bs) {
    for (const ScanPoint &pt : scan_correlation(b, fine, analytic_provider(k)))
      worst_analytic = std::max(worst_analytic, std::abs(pt.correlation - std::cos(2.0 * (pt.a - b).rad())));
    for (const ScanPoint &pt : scan_correlation(b, fine, projections))
      worst_projection = std::max(
          worst_projection, std::abs(pt.correlation - std::cos(2.0 * (pt.a - b).rad())) / pt.std_error);
  }

  ProtocolOptions opts;
  opts.strip_schmidt = k;
  const CorrelationProvider protocol = monte_carlo_protocol_provider(k, 1.0, {10000, 16, 7}, opts);
  const std::vector<Angle> coarse = angle_grid(Angle(0.0), pi / 8.0, 9);
  double worst_protocol = 0.0;
  for (Angle b : bs)
    for (const ScanPoint &pt : scan_correlation(b, coarse, protocol))
      worst_protocol = std::max(
          worst_protocol, std::abs(pt.correlation - std::cos(2.0 * (pt.a - b).rad())) / pt.std_error);

  report(6, "Scan shape C(a, b) = cos 2(a - b)",
         worst_analytic <= tol::scan_analytic && worst_projection <= tol::sigmas &&
             worst_protocol <= tol::sigmas,
         fmt("kappa1 = kappa2, b = 0.1 + n pi/4: analytic max dev %.1e (<= %.0e) over 4x37 points; "
             "MC projections max %.2f sigma over 4x37; MC protocol max %.2f sigma over 4x9 (<= %.0f)",
             worst_analytic, tol::scan_analytic, worst_projection, worst_protocol, tol::sigmas));
}

void noisy_range() {
  const SchmidtPair k = schmidt_from_dop(0.125);
  const BellSettings best = maximize_bell(k).settings;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> phase(0.0, 0.15);
  constexpr int draws = 200;
  double lo = 1e300, hi = -1e300;
  int outside = 0, above = 0;
  for (int i = 0; i < draws; ++i) {
    ProtocolOptions opts;
    opts.strip_schmidt = k;
    opts.phase_error = phase(rng);
    opts.detector = {0.005, true};
    opts.noise_seed = substream_seed(707, static_cast<std::uint64_t>(i));
    const double b = chsh(best, symbolic_protocol_provider(k, 1.0, opts)).value;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
    outside += !(b > tol::noisy_low && b < tol::noisy_high);
    above += b >= tol::noisy_high;
  }
  ProtocolOptions clean;
  clean.strip_schmidt = k;
  const double noise_free = chsh(best, symbolic_protocol_provider(k, 1.0, clean)).value;
  const bool limit = std::abs(noise_free - paper_field_maximum()) <= tol::noise_free;
  report(7, "Noisy measurement range", outside == 0 && limit,
         fmt("%d draws, phase error U[0, 0.15], detector noise 0.005: B in [%.4f, %.4f], %d outside "
             "(%.2f, %.2f) (%d at or above the upper bound); noise-free B = %.6f recovers the "
             "maximum within %.0e: %s",
             draws, lo, hi, outside, tol::noisy_low, tol::noisy_high, above, noise_free,
             tol::noise_free, limit ? "yes" : "no"));
}

void invariants() {
  std::mt19937_64 rng(808);
  double quad_dev = 0.0, max_abs_c = 0.0, unitary_dev = 0.0, stripped_norm = 0.0, gisin_dev = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const SchmidtPair k = random_entangled(rng);
    const Angle a = uniform_angle(rng), b = uniform_angle(rng);
    const BeamState src = BeamState::schmidt_source(k, 1.0);
    ProtocolOptions opts;
    opts.strip_schmidt = k;
    const MeasuredQuad q = measure_quad(src, a, b, opts);
    double direct = 0.0;
    for (int j = 1; j <= 2; ++j)
      for (int kk = 1; kk <= 2; ++kk)
        direct += joint_projection(src, a, b, j, kk);
    quad_dev = std::max({quad_dev, std::abs(q.value.sum() - 1.0), std::abs(direct - 1.0)});
    max_abs_c = std::max({max_abs_c, std::abs(q.correlation), std::abs(correlation_analytic(a, b, k))});

    const Eigen::Matrix2cd r = rotation<Complex>(a);
    unitary_dev = std::max(unitary_dev, (r * r.adjoint() - Eigen::Matrix2cd::Identity()).norm());

    const BeamState aux = split(src).auxiliary;
    stripped_norm = std::max(stripped_norm, strip(aux, b, k).coeffs.col(1).norm());
  }
  for (int i = 0; i < 20; ++i) {
    const SchmidtPair k = random_entangled(rng);
    const double at_gisin = chsh(gisin_settings(k), analytic_provider(k)).value;
    gisin_dev = std::max(gisin_dev, std::abs(at_gisin - maximize_bell(k).value));
  }
  const bool ok = quad_dev <= tol::quad_sum && max_abs_c <= 1.0 + tol::quad_sum &&
                  unitary_dev <= tol::unitarity && stripped_norm <= tol::stripped &&
                  gisin_dev <= tol::gisin;
  report(8, "Invariant suites", ok,
         fmt("2000 random (kappa, a, b): max |sum P - 1| = %.1e, max |C| = %.15f, "
             "max |R R^H - 1| = %.1e, max |f2 overlap| after stripping = %.1e; "
             "20 random kappa: max |B_gisin - B_max| = %.1e (<= %.0e)",
             quad_dev, max_abs_c, unitary_dev, stripped_norm, gisin_dev, tol::gisin));
}

} // namespace

int main() {
  tsirelson_recovery();
  paper_field();
  tomography_chain();
  classical_bound();
  protocol_oracle();
  scan_shape();
  noisy_range();
  invariants();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
