#pragma once

// Simulation-driven tuning of the spectral-diffusion parameters so that the
// fitted single-scan and time-averaged PLE linewidths hit given targets.

#include <cstdint>
#include <vector>

#include "ersim/analysis.hpp"
#include "ersim/engine.hpp"

namespace ersim {

/// One Spectrum per PLE scan repetition (counts vs absolute laser frequency).
std::vector<Spectrum> ple_spectra(const std::vector<PleScan>& scans);

struct LinewidthMeasurement {
  double mean_single_scan_fwhm = 0.0;  // Hz, over all seeds and scans
  double averaged_fwhm = 0.0;          // Hz, mean over seeds of the time-averaged FWHM
  std::vector<double> per_seed_single;
  std::vector<double> per_seed_averaged;
};

/// Runs the configured scan series once per seed and fits every scan and each time average.
LinewidthMeasurement measure_linewidths(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                        const RunOptions& options = {});

struct CalibrationTargets {
  double single_scan_fwhm = 0.0;  // Hz
  double averaged_fwhm = 0.0;     // Hz
};

struct CalibrationSettings {
  std::vector<std::uint64_t> seeds{11, 12, 13, 14};
  /// Scans per seed while tuning the fast jitter (slow walk switched off).
  unsigned fast_scans = 4;
  double rel_tolerance = 0.002;
  int max_iterations = 8;
  RunOptions run;
};

struct CalibrationResult {
  double sigma_fast = 0.0;       // Hz
  double sigma_slow_rate = 0.0;  // Hz^2/s
  LinewidthMeasurement fast_stage;
  LinewidthMeasurement final_stage;
  int evaluations = 0;
};

/// Tunes emitter 0's sigma_fast (slow walk off) to the single-scan target, then
/// sigma_slow_rate over the full scan series to the time-averaged target.
/// `base` supplies the scan grid, repeats, dwell, tau_fast and everything else.
CalibrationResult calibrate_linewidths(const ExperimentConfig& base, const CalibrationTargets& targets,
                                       const CalibrationSettings& settings = {});

}  // namespace ersim
