// ersim command-line tool: simulate, fit, correlate, report and calibrate.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ersim/analysis.hpp"
#include "ersim/calibration.hpp"
#include "ersim/config.hpp"
#include "ersim/error.hpp"
#include "ersim/ertt.hpp"
#include "ersim/pipeline.hpp"
#include "ersim/tables.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kIo = 3,
  kNotConverged = 4,
  kData = 5,
};

struct SimulateArgs {
  std::string kind, config, out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

struct FitArgs {
  std::string model, in, out;
};

struct G2Args {
  std::string in, out;
  int max_offset = 30;
  std::optional<double> rho;
  std::optional<std::uint64_t> shots;
  std::optional<double> dark_rate;
};

struct ReportArgs {
  std::string in, out;
  int max_offset = 30;
};

struct CalibrateArgs {
  std::string config, out;
  double single_mhz = 0.0, averaged_mhz = 0.0;
  std::vector<std::uint64_t> seeds{11, 12, 13, 14};
  unsigned threads = 1;
  double tolerance = 0.002;
};

int simulate(const SimulateArgs& a) {
  ersim::ConfigDocument doc = ersim::load_config(a.config);
  if (a.seed) doc.config.master_seed = *a.seed;
  const auto kind = ersim::run_kind_from_string(a.kind);
  const auto out = ersim::simulate_to_directory(kind, doc, a.out, {a.threads});
  std::cout << "simulate " << a.kind << ": " << out.clicks << " clicks -> " << a.out << "\n";
  return kOk;
}

int fit(const FitArgs& a) {
  const ersim::CsvTable table = ersim::read_csv(a.in);
  ersim::FitResult result;
  if (a.model == "exponential") {
    result = ersim::fit_exponential(ersim::histogram_from_table(table));
  } else if (a.model == "lorentzian") {
    result = ersim::fit_lorentzian(ersim::spectrum_from_table(table));
  } else {
    result = ersim::fit_gaussian(ersim::spectrum_from_table(table));
  }
  ersim::write_csv(ersim::fit_table(result), a.out);
  for (const auto& p : result.parameters)
    std::cout << p.name << " = " << ersim::format_number(p.value) << " +- " << ersim::format_number(p.uncertainty)
              << (p.unit.empty() ? "" : " " + p.unit) << "\n";
  if (!result.converged()) {
    std::cerr << "error: fit did not converge (" << ersim::to_string(result.status) << ")\n";
    return kNotConverged;
  }
  return kOk;
}

int g2(const G2Args& a) {
  const ersim::ClickStream stream = ersim::read_clickstream(a.in, a.shots);
  const ersim::CorrelationHistogram h = ersim::pulsed_g2(stream, a.max_offset);
  if (h.empty) throw ersim::AnalysisError("stream has fewer than two clicks");
  ersim::CorrelationColumns extra;
  extra.rho = a.rho;
  if (a.dark_rate) {
    const double per_shot = static_cast<double>(stream.size()) / static_cast<double>(stream.sequence.n_shots);
    const double signal = std::max(per_shot - *a.dark_rate * stream.sequence.t_coll, 0.0);
    extra.floor = ersim::dark_count_floor(signal, *a.dark_rate, stream.sequence.t_coll, stream.sequence.n_shots,
                                          a.max_offset)
                      .expected;
  }
  ersim::write_csv(ersim::correlation_table(h, extra), a.out);
  std::cout << "g2(0) = " << ersim::format_number(h.g2_at(0)) << " +- "
            << ersim::format_number(h.g2_error[h.index(0)]);
  if (a.rho) std::cout << ", corrected " << ersim::format_number(ersim::background_corrected_g2(h.g2_at(0), *a.rho));
  std::cout << "\n";
  return kOk;
}

int report(const ReportArgs& a) {
  const ersim::ReportOutcome r = ersim::write_report(a.in, a.out, a.max_offset);
  std::cout << "report: " << r.files.size() << " files -> " << a.out << "\n";
  if (!r.unconverged.empty()) {
    for (const auto& name : r.unconverged) std::cerr << "error: fit did not converge for run " << name << "\n";
    return kNotConverged;
  }
  return kOk;
}

int calibrate(const CalibrateArgs& a) {
  ersim::ConfigDocument doc = ersim::load_config(a.config);
  ersim::CalibrationSettings settings;
  settings.seeds = a.seeds;
  settings.rel_tolerance = a.tolerance;
  settings.run.threads = a.threads;
  const ersim::CalibrationResult r =
      ersim::calibrate_linewidths(doc.config, {a.single_mhz * 1e6, a.averaged_mhz * 1e6}, settings);
  auto& d = doc.config.emitters.front().diffusion;
  d.sigma_fast = r.sigma_fast;
  d.sigma_slow_rate = r.sigma_slow_rate;
  std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
  if (!out) throw ersim::IoError("cannot open " + a.out + " for writing");
  out << ersim::serialize_config(doc);
  if (!out) throw ersim::IoError("write failed for " + a.out);
  std::cout << "sigma_fast_mhz = " << ersim::format_number(r.sigma_fast * 1e-6) << "\n"
            << "sigma_slow_rate_mhz2_per_s = " << ersim::format_number(r.sigma_slow_rate * 1e-12) << "\n"
            << "single-scan FWHM = " << ersim::format_number(r.final_stage.mean_single_scan_fwhm * 1e-6) << " MHz\n"
            << "time-averaged FWHM = " << ersim::format_number(r.final_stage.averaged_fwhm * 1e-6) << " MHz\n"
            << "evaluations = " << r.evaluations << "\n";
  return kOk;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ersim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ersim::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ersim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and analysis tool for single rare-earth ions in nanophotonic cavities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ersim 0.1.0");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a PLE scan, lifetime or g2 simulation into a directory");
  sim_cmd->add_option("kind", sim.kind, "ple | lifetime | g2")->required()->check(
      CLI::IsMember({"ple", "lifetime", "g2"}));
  sim_cmd->add_option("--config", sim.config, "Configuration document (INI)")->required();
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_option("--seed", sim.seed, "Override the master seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 256u));

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a spectrum or decay histogram CSV");
  fit_cmd->add_option("model", fit_args.model, "lorentzian | gaussian | exponential")
      ->required()
      ->check(CLI::IsMember({"lorentzian", "gaussian", "exponential"}));
  fit_cmd->add_option("--in", fit_args.in, "Input CSV")->required();
  fit_cmd->add_option("--out", fit_args.out, "Output CSV with fitted parameters")->required();

  G2Args g2_args;
  auto* g2_cmd = app.add_subcommand("g2", "Pulsed autocorrelation of an ERTT click stream");
  g2_cmd->add_option("--in", g2_args.in, "Click stream (.ertt)")->required();
  g2_cmd->add_option("--out", g2_args.out, "Output CSV")->required();
  g2_cmd->add_option("--max-offset", g2_args.max_offset, "Largest shot offset")->check(CLI::Range(1, 100000));
  g2_cmd->add_option("--rho", g2_args.rho, "Signal fraction for background correction")
      ->check(CLI::Range(0.0, 1.0));
  g2_cmd->add_option("--shots", g2_args.shots, "Number of shots in the trace (default: last shot + 1)");
  g2_cmd->add_option("--dark-rate", g2_args.dark_rate, "Dark-count rate in Hz for the floor column")
      ->check(CLI::NonNegativeNumber);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Fit and summarize a tree of simulation outputs");
  rep_cmd->add_option("--in", rep.in, "Directory containing simulation outputs")->required();
  rep_cmd->add_option("--out", rep.out, "Report directory")->required();
  rep_cmd->add_option("--max-offset", rep.max_offset, "Largest shot offset for g2")->check(CLI::Range(1, 100000));

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Tune spectral diffusion to target PLE linewidths");
  cal_cmd->add_option("--config", cal.config, "Base PLE configuration (scan grid, repeats, dwell)")->required();
  cal_cmd->add_option("--single-fwhm-mhz", cal.single_mhz, "Target single-scan FWHM")->required()->check(
      CLI::PositiveNumber);
  cal_cmd->add_option("--averaged-fwhm-mhz", cal.averaged_mhz, "Target time-averaged FWHM")->required()->check(
      CLI::PositiveNumber);
  cal_cmd->add_option("--out", cal.out, "Calibrated configuration to write")->required();
  cal_cmd->add_option("--seeds", cal.seeds, "Seeds averaged during the sweep");
  cal_cmd->add_option("--tolerance", cal.tolerance, "Relative tolerance on both widths");
  cal_cmd->add_option("--threads", cal.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*sim_cmd) return guarded([&] { return simulate(sim); });
  if (*fit_cmd) return guarded([&] { return fit(fit_args); });
  if (*g2_cmd) return guarded([&] { return g2(g2_args); });
  if (*rep_cmd) return guarded([&] { return report(rep); });
  if (*cal_cmd) return guarded([&] { return calibrate(cal); });
  return kUsage;
}
