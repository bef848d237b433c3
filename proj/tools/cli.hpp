#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bellfield/angle.hpp"
#include "bellfield/ensemble.hpp"
#include "bellfield/field_core.hpp"
#include "bellfield/interferometer.hpp"

namespace bellfield::cli {

enum ExitCode : int { ok = 0, usage_error = 1, degenerate_physics = 2, io_error = 3 };

/// Settings shared by every subcommand. Keys of the config file are the
/// member names; flags mirror them with a `--` prefix.
struct RunConfig {
  std::optional<double> kappa1;
  std::optional<double> dop;
  double intensity = 1.0;
  std::size_t n_realizations = 10000;
  std::size_t samples_per_realization = 16;
  std::uint64_t seed = 0;
  double detector_noise = 0.0;
  double phase_error = 0.0;
  double angle_grid_step = pi / 36.0;
  std::string output;
  std::string format = "csv";
  /// 0 picks the hardware concurrency.
  unsigned workers = 0;

  /// Throws InvalidArgument on any out-of-range value.
  void validate() const;
  /// Unpolarized when neither kappa1 nor dop is set.
  SchmidtPair schmidt() const;
  EnsembleParams ensemble() const;
  DetectorModel detector() const;
  unsigned worker_count() const;
};

/// Radians, or degrees with a `deg` suffix.
Angle parse_angle(const std::string &text);
std::vector<Angle> parse_angle_list(const std::string &text);

/// Angles are written with 9 significant digits.
std::string format_angle(Angle a);
std::string format_value(double v);

/// Runs the command line in-process. Records go to `out` unless an output
/// path is configured; diagnostics and summaries go to `err`.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bellfield::cli
