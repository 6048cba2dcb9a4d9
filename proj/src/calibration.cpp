#include "ersim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ersim/error.hpp"

namespace ersim {

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

}  // namespace

std::vector<Spectrum> ple_spectra(const std::vector<PleScan>& scans) {
  std::vector<Spectrum> out;
  out.reserve(scans.size());
  for (const PleScan& scan : scans) {
    Spectrum s;
    s.label = "scan " + std::to_string(scan.repeat);
    s.acquisition_time = scan.end_wall_time - scan.start_wall_time;
    for (const PlePoint& p : scan.points) s.points.push_back({p.laser_frequency, static_cast<double>(p.total_counts)});
    out.push_back(std::move(s));
  }
  return out;
}

LinewidthMeasurement measure_linewidths(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                        const RunOptions& options) {
  if (seeds.empty()) throw InvalidParameter("need at least one seed");
  LinewidthMeasurement m;
  std::vector<double> all_single;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig c = config;
    c.master_seed = seed;
    const std::vector<Spectrum> spectra = ple_spectra(run_ple_scan(c, options));
    if (spectra.size() >= 2) {
      const SpectralDiffusionMap map = spectral_diffusion_map(spectra);
      for (double f : map.scan_fwhm)
        if (std::isfinite(f)) all_single.push_back(f);
      m.per_seed_single.push_back(map.mean_scan_fwhm);
      m.per_seed_averaged.push_back(map.averaged_fwhm);
    } else {
      const FitResult fit = fit_gaussian(spectra.front());
      const double f = fit.converged() ? std::abs(fit.value("fwhm")) : std::nan("");
      if (std::isfinite(f)) all_single.push_back(f);
      m.per_seed_single.push_back(f);
      m.per_seed_averaged.push_back(f);
    }
  }
  m.mean_single_scan_fwhm = mean(all_single);
  m.averaged_fwhm = mean(m.per_seed_averaged);
  return m;
}

CalibrationResult calibrate_linewidths(const ExperimentConfig& base, const CalibrationTargets& targets,
                                       const CalibrationSettings& settings) {
  if (!(targets.single_scan_fwhm > 0.0) || !(targets.averaged_fwhm > targets.single_scan_fwhm))
    throw InvalidParameter("targets need 0 < single-scan FWHM < time-averaged FWHM");
  if (base.emitters.empty()) throw InvalidParameter("calibration needs an emitter");
  CalibrationResult result;

  // Stage 1: fast jitter alone. The fitted width scales almost linearly with
  // sigma_fast once it dominates gamma_h, so a multiplicative update converges quickly.
  ExperimentConfig fast = base;
  fast.scan_repeats = settings.fast_scans;
  fast.inter_scan_dwell = 0.0;
  for (auto& e : fast.emitters) e.diffusion.sigma_slow_rate = 0.0;
  double sigma = targets.single_scan_fwhm / kFwhmPerSigma;
  for (int it = 0; it < settings.max_iterations; ++it) {
    fast.emitters.front().diffusion.sigma_fast = sigma;
    result.fast_stage = measure_linewidths(fast, settings.seeds, settings.run);
    ++result.evaluations;
    const double got = result.fast_stage.mean_single_scan_fwhm;
    if (!std::isfinite(got)) throw AnalysisError("single-scan fits failed during calibration");
    const double ratio = targets.single_scan_fwhm / got;
    if (std::abs(ratio - 1.0) < settings.rel_tolerance) break;
    sigma *= ratio;
  }

  // Stage 2: slow walk over the full scan series. For Brownian motion the
  // time-averaged spread of the path over a span T is D T / 6, which gives
  // the starting point; widths add roughly in quadrature afterwards. Drift
  // within a scan also widens single scans slightly, so sigma_fast is
  // corrected alongside.
  ExperimentConfig full = base;
  const double span = static_cast<double>(full.scan_repeats) *
                          (static_cast<double>(full.laser_frequencies.size() * full.sequence.n_shots) *
                           full.sequence.t_rep) +
                      static_cast<double>(full.scan_repeats - 1) * full.inter_scan_dwell;
  const double extra_sigma2 =
      (targets.averaged_fwhm * targets.averaged_fwhm - targets.single_scan_fwhm * targets.single_scan_fwhm) /
      (kFwhmPerSigma * kFwhmPerSigma);
  double rate = 6.0 * extra_sigma2 / span;
  for (int it = 0; it < settings.max_iterations; ++it) {
    full.emitters.front().diffusion.sigma_fast = sigma;
    full.emitters.front().diffusion.sigma_slow_rate = rate;
    result.final_stage = measure_linewidths(full, settings.seeds, settings.run);
    ++result.evaluations;
    const double single = result.final_stage.mean_single_scan_fwhm;
    const double avg = result.final_stage.averaged_fwhm;
    if (!std::isfinite(avg) || !std::isfinite(single)) throw AnalysisError("fits failed during calibration");
    const bool single_ok = std::abs(single / targets.single_scan_fwhm - 1.0) < settings.rel_tolerance;
    const bool avg_ok = std::abs(avg / targets.averaged_fwhm - 1.0) < settings.rel_tolerance;
    if (single_ok && avg_ok) break;
    if (it + 1 == settings.max_iterations) break;
    if (!single_ok) sigma *= targets.single_scan_fwhm / single;
    if (!avg_ok) {
      const double want = targets.averaged_fwhm * targets.averaged_fwhm - single * single;
      const double have = avg * avg - single * single;
      rate *= have > 0.0 ? std::clamp(want / have, 0.1, 10.0) : 4.0;
    }
  }
  result.sigma_fast = sigma;
  result.sigma_slow_rate = rate;
  return result;
}

}  // namespace ersim
