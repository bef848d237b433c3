#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "bellfield/bell.hpp"
#include "bellfield/errors.hpp"
#include "bellfield/experiment.hpp"
#include "bellfield/polarimetry.hpp"

namespace bellfield::cli {

void RunConfig::validate() const {
  if (kappa1 && dop)
    throw InvalidArgument("kappa1 and dop are mutually exclusive; give one of them");
  if (kappa1 && !(*kappa1 >= std::sqrt(0.5) - 1e-12 && *kappa1 <= 1.0))
    throw InvalidArgument("kappa1 must lie in [1/sqrt(2), 1] (kappa1 >= kappa2 by convention)");
  if (dop && !(*dop >= 0.0 && *dop <= 1.0))
    throw InvalidArgument("dop must lie in [0, 1]");
  if (!(intensity > 0.0) || !std::isfinite(intensity))
    throw InvalidArgument("intensity must be positive");
  if (n_realizations < 1)
    throw InvalidArgument("n_realizations must be at least 1");
  if (samples_per_realization < 1)
    throw InvalidArgument("samples_per_realization must be at least 1");
  if (!(detector_noise >= 0.0 && detector_noise < 0.1))
    throw InvalidArgument("detector_noise must lie in [0, 0.1)");
  if (!std::isfinite(phase_error))
    throw InvalidArgument("phase_error must be finite");
  if (!(angle_grid_step > 0.0 && angle_grid_step <= pi))
    throw InvalidArgument("angle_grid_step must lie in (0, pi]");
  if (format != "csv" && format != "json")
    throw InvalidArgument("format must be csv or json");
}

SchmidtPair RunConfig::schmidt() const {
  if (kappa1)
    return SchmidtPair::from_kappa1(*kappa1);
  if (dop)
    return schmidt_from_dop(*dop);
  return SchmidtPair::unpolarized();
}

EnsembleParams RunConfig::ensemble() const {
  return {n_realizations, samples_per_realization, seed};
}

DetectorModel RunConfig::detector() const { return {detector_noise, detector_noise > 0.0}; }

unsigned RunConfig::worker_count() const {
  if (workers > 0)
    return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

Angle parse_angle(const std::string &text) {
  std::string body = text;
  bool degrees = false;
  if (body.size() > 3 && body.compare(body.size() - 3, 3, "deg") == 0) {
    degrees = true;
    body.resize(body.size() - 3);
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || end != body.data() + body.size() || body.empty() ||
      !std::isfinite(value))
    throw InvalidArgument("not an angle: '" + text + "' (radians, or degrees with a deg suffix)");
  return degrees ? Angle::degrees(value) : Angle(value);
}

std::vector<Angle> parse_angle_list(const std::string &text) {
  std::vector<Angle> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_angle(item));
  if (out.empty())
    throw InvalidArgument("empty angle list");
  return out;
}

namespace {

std::string printf_format(const char *pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

} // namespace

std::string format_angle(Angle a) { return printf_format("%.9g", a.rad()); }
std::string format_value(double v) { return printf_format("%.15g", v); }

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string render(const Table &t, const std::string &format) {
  std::ostringstream os;
  if (format == "json") {
    for (const auto &row : t.rows) {
      nlohmann::ordered_json record;
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        record[t.columns[i]] = nlohmann::json::parse(row[i]);
      os << record.dump() << '\n';
    }
    return os.str();
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto &row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

/// One polyline per distinct b, drawn from the scan records themselves: the
/// points attribute holds the a_rad and C strings of the table verbatim.
std::string render_svg(const Table &scan) {
  const double width = 640.0, height = 400.0, left = 60.0, right = 20.0;
  double a_min = INFINITY, a_max = -INFINITY;
  std::vector<std::string> order;
  std::map<std::string, std::string> points;
  for (const auto &row : scan.rows) {
    const double a = std::stod(row[0]);
    a_min = std::min(a_min, a);
    a_max = std::max(a_max, a);
    if (!points.count(row[1]))
      order.push_back(row[1]);
    points[row[1]] += (points[row[1]].empty() ? "" : " ") + row[0] + "," + row[2];
  }
  const double span = a_max > a_min ? a_max - a_min : 1.0;
  const double sx = (width - left - right) / span;
  const double sy = 0.45 * height / 1.0;
  const double tx = left - a_min * sx;
  const double ty = 0.5 * height;
  const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << ty << "\" x2=\"" << width - right << "\" y2=\""
     << ty << "\" stroke=\"#888\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << ty - sy << "\" x2=\"" << left << "\" y2=\""
     << ty + sy << "\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << left - 8 << "\" y=\"" << ty - sy + 4
     << "\" text-anchor=\"end\" font-size=\"12\">1</text>\n";
  os << "<text x=\"" << left - 8 << "\" y=\"" << ty + sy + 4
     << "\" text-anchor=\"end\" font-size=\"12\">-1</text>\n";
  os << "<text x=\"" << width - right << "\" y=\"" << height - 6
     << "\" text-anchor=\"end\" font-size=\"12\">a (rad)</text>\n";
  os << "<text x=\"" << left << "\" y=\"16\" font-size=\"12\">C(a, b)</text>\n";
  os << "<g transform=\"matrix(" << format_value(sx) << " 0 0 " << format_value(-sy) << ' '
     << format_value(tx) << ' ' << format_value(ty) << ")\">\n";
  for (std::size_t i = 0; i < order.size(); ++i)
    os << "<polyline data-b=\"" << order[i] << "\" fill=\"none\" stroke=\""
       << palette[i % std::size(palette)]
       << "\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\" points=\""
       << points[order[i]] << "\"/>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

struct Output {
  Table table;
  std::string summary;
  bool wants_svg = false;
};

ProtocolOptions protocol_options(const RunConfig &cfg) {
  ProtocolOptions o;
  o.strip_schmidt = cfg.schmidt();
  o.phase_error = cfg.phase_error;
  o.detector = cfg.detector();
  o.noise_seed = cfg.seed;
  return o;
}

CorrelationProvider make_provider(const RunConfig &cfg, const std::string &path) {
  const SchmidtPair schmidt = cfg.schmidt();
  if (path == "analytic")
    return analytic_provider(schmidt);
  if (path == "symbolic")
    return symbolic_protocol_provider(schmidt, cfg.intensity, protocol_options(cfg));
  if (path == "monte-carlo")
    return monte_carlo_protocol_provider(schmidt, cfg.intensity, cfg.ensemble(),
                                         protocol_options(cfg));
  if (path == "projection")
    return monte_carlo_projection_provider(std::make_shared<const FieldEnsemble>(
        generate(schmidt, cfg.intensity, cfg.ensemble(), cfg.worker_count())));
  throw InvalidArgument("unknown path '" + path +
                        "' (analytic, symbolic, monte-carlo, or projection)");
}

BellSettings parse_settings(const std::string &text) {
  const auto angles = parse_angle_list(text);
  if (angles.size() != 4)
    throw InvalidArgument("settings need four angles a,a',b,b'");
  return {angles[0], angles[1], angles[2], angles[3]};
}

Output cmd_tomography(const RunConfig &cfg, const std::string &stokes_text) {
  StokesEstimate est;
  if (!stokes_text.empty()) {
    std::vector<double> v;
    std::stringstream ss(stokes_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double x = 0.0;
      const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (ec != std::errc() || end != item.data() + item.size() || item.empty())
        throw InvalidArgument("not a Stokes component: '" + item + "'");
      v.push_back(x);
    }
    if (v.size() == 3)
      est.value = {1.0, v[0], v[1], v[2]};
    else if (v.size() == 4)
      est.value = {v[0], v[1], v[2], v[3]};
    else
      throw InvalidArgument("--stokes takes s1,s2,s3 (s0 = 1) or s0,s1,s2,s3");
  } else {
    const FieldEnsemble e =
        generate(cfg.schmidt(), cfg.intensity, cfg.ensemble(), cfg.worker_count());
    est = stokes_estimate(e);
  }
  const double p = dop(est.value);
  const SchmidtPair k = schmidt_from_dop(p);
  const SchmidtFrame frame = schmidt_frame(coherence_from_stokes(est.value));

  Output out;
  out.table.columns = {"S0",       "S1",        "S2",        "S3",
                       "S0_stderr", "S1_stderr", "S2_stderr", "S3_stderr",
                       "dop",       "kappa1",    "kappa2",    "frame_rad",
                       "n_realizations", "samples_per_realization", "samples"};
  const bool sampled = stokes_text.empty();
  out.table.rows.push_back(
      {format_value(est.value.s0), format_value(est.value.s1), format_value(est.value.s2),
       format_value(est.value.s3), format_value(est.std_error[0]),
       format_value(est.std_error[1]), format_value(est.std_error[2]),
       format_value(est.std_error[3]), format_value(p), format_value(k.kappa1()),
       format_value(k.kappa2()), format_angle(frame.rotation),
       std::to_string(sampled ? cfg.n_realizations : 0),
       std::to_string(sampled ? cfg.samples_per_realization : 0), std::to_string(est.samples)});
  char line[128];
  std::snprintf(line, sizeof line, "DOP = %.6f, kappa = (%.6f, %.6f)\n", p, k.kappa1(),
                k.kappa2());
  out.summary = line;
  return out;
}

Output cmd_scan(const RunConfig &cfg, const std::vector<Angle> &b_values,
                const std::string &path) {
  const CorrelationProvider provider = make_provider(cfg, path);
  const auto n = static_cast<std::size_t>(std::floor(pi / cfg.angle_grid_step + 1e-9)) + 1;
  const std::vector<Angle> grid = angle_grid(Angle(0.0), cfg.angle_grid_step, n);
  Output out;
  out.table.columns = {"a_rad", "b_rad", "C", "stderr"};
  for (Angle b : b_values)
    for (const ScanPoint &p : scan_correlation(b, grid, provider, cfg.worker_count()))
      out.table.rows.push_back({format_angle(p.a), format_angle(p.b), format_value(p.correlation),
                                format_value(p.std_error)});
  out.wants_svg = true;
  return out;
}

Table bell_table(const BellResult &r) {
  Table t;
  t.columns = {"a", "a_prime", "b", "b_prime", "C_ab", "C_apb", "C_abp", "C_apbp", "B", "stderr"};
  t.rows.push_back({format_angle(r.settings.a), format_angle(r.settings.a_prime),
                    format_angle(r.settings.b), format_angle(r.settings.b_prime),
                    format_value(r.correlations[0]), format_value(r.correlations[1]),
                    format_value(r.correlations[2]), format_value(r.correlations[3]),
                    format_value(r.value), format_value(r.std_error)});
  return t;
}

std::string bell_summary(const BellResult &r) {
  char line[96];
  if (r.std_error > 0.0)
    std::snprintf(line, sizeof line, "B = %.6f +- %.6f\n", r.value, r.std_error);
  else
    std::snprintf(line, sizeof line, "B = %.6f\n", r.value);
  return line;
}

Output cmd_bell(const RunConfig &cfg, bool maximize, bool gisin, const std::string &settings_text,
                const std::string &path) {
  if (int(maximize) + int(gisin) + int(!settings_text.empty()) != 1)
    throw InvalidArgument("bell needs exactly one of --maximize, --gisin or --settings");
  BellSettings settings;
  if (maximize) {
    OptimizerOptions opts;
    opts.grid_step = cfg.angle_grid_step;
    settings = maximize_bell(cfg.schmidt(), opts).settings;
  } else if (gisin) {
    settings = gisin_settings(cfg.schmidt());
  } else {
    settings = parse_settings(settings_text);
  }
  const BellResult r = chsh(settings, make_provider(cfg, path));
  return {bell_table(r), bell_summary(r), false};
}

Output cmd_simulate_experiment(const RunConfig &cfg, const std::string &settings_text) {
  ExperimentConfig ec;
  ec.source = cfg.schmidt();
  ec.intensity = cfg.intensity;
  ec.params = cfg.ensemble();
  ec.detector = cfg.detector();
  ec.phase_error = cfg.phase_error;
  ec.workers = cfg.worker_count();

  BellSettings settings;
  if (settings_text.empty()) {
    OptimizerOptions opts;
    opts.grid_step = cfg.angle_grid_step;
    settings = maximize_bell(calibrate(ec).schmidt, opts).settings;
  } else {
    settings = parse_settings(settings_text);
  }
  const ExperimentRun run = simulate_experiment(ec, chsh_pairs(settings));

  Output out;
  out.table.columns = {"a_rad", "b_rad", "j", "k", "I_total", "I_arm", "I_aux", "I_out", "P"};
  for (const ExperimentRecord &r : run.records)
    out.table.rows.push_back({format_angle(r.a), format_angle(r.b), std::to_string(r.j),
                              std::to_string(r.k), format_value(r.readings.total),
                              format_value(r.readings.arm), format_value(r.readings.aux),
                              format_value(r.readings.out), format_value(r.projection)});
  const BellResult b = bell_from_correlations(settings, run.correlations);
  char line[128];
  std::snprintf(line, sizeof line, "calibrated DOP = %.6f, kappa = (%.6f, %.6f)\n",
                run.calibration.dop, run.calibration.schmidt.kappa1(),
                run.calibration.schmidt.kappa2());
  out.summary = line + bell_summary(b);
  return out;
}

/// Writes every file to a temporary sibling first and renames only when all
/// writes succeeded, so a failure leaves the destinations untouched.
void write_files(const std::vector<std::pair<std::string, std::string>> &files) {
  namespace fs = std::filesystem;
  std::vector<fs::path> temps;
  const auto cleanup = [&temps] {
    std::error_code ignored;
    for (const auto &t : temps)
      fs::remove(t, ignored);
  };
  for (const auto &[path, text] : files) {
    fs::path tmp = path;
    tmp += ".partial";
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (os)
      temps.push_back(tmp);
    if (!os || !(os << text) || !os.flush()) {
      cleanup();
      throw std::ios_base::failure("cannot write '" + path + "'");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], files[i].first, ec);
    if (ec) {
      cleanup();
      throw std::ios_base::failure("cannot write '" + files[i].first + "': " + ec.message());
    }
  }
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"Classically entangled field simulator: tomography, correlation scans, Bell "
               "parameters and the interferometric experiment.",
               "bellfield"};
  app.set_config("--config", "", "Flat key = value file; flags override its values");
  app.allow_config_extras(false);
  app.fallthrough();
  app.require_subcommand(1);

  auto *kappa1 = app.add_option("--kappa1", cfg.kappa1, "Larger Schmidt coefficient");
  auto *dop_opt = app.add_option("--dop", cfg.dop, "Degree of polarization");
  kappa1->excludes(dop_opt);
  dop_opt->excludes(kappa1);
  app.add_option("--intensity", cfg.intensity, "Source intensity");
  app.add_option("--n_realizations,--n-realizations", cfg.n_realizations,
                 "Realizations per ensemble");
  app.add_option("--samples_per_realization,--samples-per-realization",
                 cfg.samples_per_realization, "Samples per realization");
  app.add_option("--seed", cfg.seed, "Master seed");
  app.add_option("--detector_noise,--detector-noise", cfg.detector_noise,
                 "Relative detector noise per reading");
  app.add_option("--phase_error,--phase-error", cfg.phase_error,
                 "Interferometer phase error (rad)");
  app.add_option("--angle_grid_step,--angle-grid-step", cfg.angle_grid_step,
                 "Angle grid step (rad)");
  app.add_option("--output", cfg.output, "Output path (default: standard output)");
  app.add_option("--format", cfg.format, "csv or json");
  app.add_option("--workers", cfg.workers, "Worker threads (0: all cores)");

  std::string stokes_text;
  auto *tomo = app.add_subcommand("tomography", "Stokes parameters, DOP and Schmidt pair");
  tomo->add_option("--stokes", stokes_text, "Use given Stokes values instead of an ensemble");

  std::string b_text;
  std::string scan_path = "analytic";
  std::string svg_path;
  auto *scan = app.add_subcommand("scan", "C(a, b) over a at fixed b values, with an SVG plot");
  scan->add_option("--b", b_text, "Comma-separated fixed b values (default: 0, pi/4, pi/2, 3pi/4)");
  scan->add_option("--path", scan_path, "analytic, symbolic, monte-carlo or projection");
  scan->add_option("--svg", svg_path, "SVG path (default: output path with .svg)");

  bool maximize = false;
  bool gisin = false;
  std::string settings_text;
  std::string bell_path = "analytic";
  auto *bell = app.add_subcommand("bell", "Bell parameter at given or optimal settings");
  auto *max_flag = bell->add_flag("--maximize", maximize, "Use the optimal settings");
  auto *gisin_flag =
      bell->add_flag("--gisin", gisin, "Use a = 0, a' = pi/4, b' = -b with the Gisin angle");
  auto *set_opt = bell->add_option("--settings", settings_text, "a,a',b,b'");
  max_flag->excludes(set_opt)->excludes(gisin_flag);
  gisin_flag->excludes(set_opt);
  bell->add_option("--path", bell_path, "analytic, symbolic, monte-carlo or projection");

  std::string experiment_settings;
  auto *experiment = app.add_subcommand(
      "simulate-experiment", "Calibrated interferometric measurement of the four correlations");
  experiment->add_option("--settings", experiment_settings,
                         "a,a',b,b' (default: optimal for the calibrated field)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::FileError &e) {
    err << "error: " << e.what() << '\n';
    return io_error;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }

  try {
    cfg.validate();
    Output result;
    if (tomo->parsed())
      result = cmd_tomography(cfg, stokes_text);
    else if (scan->parsed())
      result = cmd_scan(cfg, b_text.empty() ? angle_grid(Angle(0.0), pi / 4.0, 4)
                                            : parse_angle_list(b_text),
                        scan_path);
    else if (bell->parsed())
      result = cmd_bell(cfg, maximize, gisin, settings_text, bell_path);
    else
      result = cmd_simulate_experiment(cfg, experiment_settings);

    const std::string text = render(result.table, cfg.format);
    std::vector<std::pair<std::string, std::string>> files;
    if (!cfg.output.empty())
      files.emplace_back(cfg.output, text);
    if (result.wants_svg) {
      std::string target = svg_path;
      if (target.empty() && !cfg.output.empty())
        target = std::filesystem::path(cfg.output).replace_extension(".svg").string();
      if (!target.empty() && target == cfg.output)
        throw InvalidArgument("SVG path must differ from the output path");
      if (!target.empty())
        files.emplace_back(target, render_svg(result.table));
    }
    write_files(files);
    if (cfg.output.empty())
      out << text;
    err << result.summary;
    return ok;
  } catch (const DegenerateConfiguration &e) {
    err << "degenerate configuration: " << e.what() << '\n';
    return degenerate_physics;
  } catch (const InvalidArgument &e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::ios_base::failure &e) {
    err << "I/O error: " << e.what() << '\n';
    return io_error;
  }
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv{"bellfield"};
  for (const auto &a : args)
    argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace bellfield::cli
