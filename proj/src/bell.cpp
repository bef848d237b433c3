#include "bellfield/bell.hpp"

#include <cmath>

#include "bellfield/errors.hpp"
#include "bellfield/parallel.hpp"

namespace bellfield {

double ProjectionQuad::at(int j, int k) const {
  return const_cast<ProjectionQuad *>(this)->at(j, k);
}

double &ProjectionQuad::at(int j, int k) {
  if (j == 1 && k == 1) return p11;
  if (j == 1 && k == 2) return p12;
  if (j == 2 && k == 1) return p21;
  if (j == 2 && k == 2) return p22;
  throw InvalidArgument("projection indices must be 1 or 2");
}

double correlation_from_quad(const ProjectionQuad &q) { return q.p11 - q.p12 - q.p21 + q.p22; }

double correlation_analytic(Angle a, Angle b, const SchmidtPair &schmidt) {
  const Angle a2 = 2.0 * a;
  const Angle b2 = 2.0 * b;
  return a2.cos() * b2.cos() + 2.0 * schmidt.product() * a2.sin() * b2.sin();
}

CorrelationProvider analytic_provider(const SchmidtPair &schmidt) {
  return [schmidt](Angle a, Angle b) {
    return CorrelationValue{correlation_analytic(a, b, schmidt), 0.0};
  };
}

BellResult chsh(const BellSettings &s, const CorrelationProvider &corr) {
  const std::array<CorrelationValue, 4> c{corr(s.a, s.b), corr(s.a_prime, s.b),
                                          corr(s.a, s.b_prime), corr(s.a_prime, s.b_prime)};
  BellResult r;
  r.settings = s;
  double var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    r.correlations[i] = c[i].value;
    r.correlation_std_errors[i] = c[i].std_error;
    var += c[i].std_error * c[i].std_error;
  }
  r.value = std::abs(c[0].value - c[1].value + c[2].value + c[3].value);
  r.std_error = std::sqrt(var);
  return r;
}

double bell_expanded(const BellSettings &s, const SchmidtPair &schmidt) {
  const double ca = std::cos(2.0 * s.a.rad()), sa = std::sin(2.0 * s.a.rad());
  const double cap = std::cos(2.0 * s.a_prime.rad()), sap = std::sin(2.0 * s.a_prime.rad());
  const double cb = std::cos(2.0 * s.b.rad()), sb = std::sin(2.0 * s.b.rad());
  const double cbp = std::cos(2.0 * s.b_prime.rad()), sbp = std::sin(2.0 * s.b_prime.rad());
  const double value = ca * (cb - cbp) + cap * (cb + cbp) +
                       2.0 * schmidt.product() * (sa * (sb - sbp) + sap * (sb + sbp));
  return std::abs(value);
}

BellSettings swap_parties(const BellSettings &s) { return {s.b, s.b_prime, s.a, s.a_prime}; }

double bell_ceiling(const SchmidtPair &schmidt) {
  const double x = 2.0 * schmidt.product();
  return 2.0 * std::sqrt(1.0 + x * x);
}

namespace {

using Point = std::array<double, 4>;

BellSettings to_settings(const Point &x) {
  return {Angle(x[0]), Angle(x[1]), Angle(x[2]), Angle(x[3])};
}

template <typename F>
double golden_section_max(F &&f, double lo, double hi, double tol, double &best) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  if (f1 >= f2) {
    best = f1;
    return x1;
  }
  best = f2;
  return x2;
}

} // namespace

BellResult maximize_bell(const CorrelationProvider &corr, const OptimizerOptions &opts) {
  if (!(opts.grid_step > 0.0) || opts.grid_step > pi)
    throw InvalidArgument("optimizer grid step must lie in (0, pi]");
  const auto n = static_cast<std::size_t>(std::llround(pi / opts.grid_step));
  const double step = pi / static_cast<double>(n);

  // C has period pi in each argument, so one table covers every setting.
  std::vector<double> table(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      table[i * n + j] = corr(Angle(step * i), Angle(step * j)).value;

  Point x{};
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ip = 0; ip < n; ++ip)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t jp = 0; jp < n; ++jp) {
          const double v = std::abs(table[i * n + j] - table[ip * n + j] + table[i * n + jp] +
                                    table[ip * n + jp]);
          if (v > best) {
            best = v;
            x = {step * i, step * ip, step * j, step * jp};
          }
        }

  const auto objective = [&corr](const Point &p) { return chsh(to_settings(p), corr).value; };
  best = objective(x);
  for (int pass = 0; pass < opts.max_passes; ++pass) {
    const double before = best;
    for (std::size_t d = 0; d < 4; ++d) {
      Point trial = x;
      double found = 0.0;
      const double arg = golden_section_max(
          [&](double t) {
            trial[d] = t;
            return objective(trial);
          },
          x[d] - step, x[d] + step, opts.angle_tolerance, found);
      if (found > best) {
        best = found;
        x[d] = arg;
      }
    }
    if (best - before < opts.min_improvement)
      break;
  }
  return chsh(to_settings(x), corr);
}

BellResult maximize_bell(const SchmidtPair &schmidt, const OptimizerOptions &opts) {
  return maximize_bell(analytic_provider(schmidt), opts);
}

BellSettings gisin_settings(const SchmidtPair &schmidt) {
  const double x = 2.0 * schmidt.product();
  if (x <= 1e-12)
    throw DegenerateConfiguration(
        "Gisin settings need an entangled field (kappa1 kappa2 > 0); the function-space angle "
        "is undefined for a separable beam");
  const double beta = 0.5 * std::acos(1.0 / std::sqrt(1.0 + x * x));
  return {Angle(0.0), Angle(pi / 4.0), Angle(-beta), Angle(beta)};
}

std::vector<ScanPoint> scan_correlation(Angle b, std::span<const Angle> a_grid,
                                        const CorrelationProvider &corr, unsigned workers) {
  if (a_grid.empty())
    throw InvalidArgument("correlation scan needs a non-empty angle grid");
  std::vector<ScanPoint> out(a_grid.size());
  parallel_for(a_grid.size(), workers, [&](std::size_t i) {
    const CorrelationValue c = corr(a_grid[i], b);
    out[i] = {a_grid[i], b, c.value, c.std_error};
  });
  return out;
}

std::vector<Angle> angle_grid(Angle start, double step, std::size_t n) {
  std::vector<Angle> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    grid.push_back(Angle(start.rad() + step * static_cast<double>(i)));
  return grid;
}

} // namespace bellfield
