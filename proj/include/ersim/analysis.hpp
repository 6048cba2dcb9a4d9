#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ersim/clickstream.hpp"
#include "ersim/fit.hpp"

namespace ersim {

struct SpectrumPoint {
  double frequency = 0.0;  // Hz
  double counts = 0.0;
};

struct Spectrum {
  std::vector<SpectrumPoint> points;
  double acquisition_time = 0.0;  // s
  std::string label;

  std::size_t size() const { return points.size(); }
  std::vector<double> frequencies() const;
  std::vector<double> counts() const;
  /// Frequencies strictly increasing, counts finite and non-negative.
  void validate() const;
};

/// Uniform histogram of click delays measured from the end of the pulse.
///
/// Bin k covers (k*w, (k+1)*w]; a delay of exactly zero goes to bin 0.
struct DecayHistogram {
  double bin_width = 0.0;  // s
  std::vector<double> counts;
  std::uint64_t total_shots = 0;

  std::size_t bins() const { return counts.size(); }
  double edge(std::size_t k) const { return bin_width * static_cast<double>(k); }
  double center(std::size_t k) const { return bin_width * (static_cast<double>(k) + 0.5); }
  double total() const;
};

DecayHistogram histogram_arrivals(const ClickStream& stream, double bin_width);

/// Optional starting point for a fit, in the units of the reported parameters.
struct FitOptions {
  std::optional<std::vector<double>> initial;
  LmOptions lm;
};

/// A * exp(-t/t1) + B with Poisson weights 1/max(counts, 1).
/// Parameters: amplitude (counts/bin), t1 (s), baseline (counts/bin).
FitResult fit_exponential(const DecayHistogram& hist, const FitOptions& options = {});

/// Parameters: center (Hz), fwhm (Hz), amplitude, baseline, and derived q_factor = center / fwhm.
FitResult fit_lorentzian(const Spectrum& spectrum, const FitOptions& options = {});

/// baseline + A exp(-4 ln2 (nu-c)^2 / fwhm^2). Parameters: center, fwhm, amplitude, baseline, sigma.
FitResult fit_gaussian(const Spectrum& spectrum, const FitOptions& options = {});

/// Pulsed single-detector autocorrelation binned by shot offset.
struct CorrelationHistogram {
  int max_offset = 0;
  double t_rep = 0.0;
  std::uint64_t n_shots = 0;
  std::uint64_t n_clicks = 0;
  /// Index k holds offset k - max_offset. Each unordered pair counts once at +d and once at -d,
  /// so a same-shot pair adds two to offset 0.
  std::vector<double> coincidences;
  /// Shot pairs available at each offset: n_shots - |d|.
  std::vector<double> shot_pairs;
  std::vector<double> g2;
  std::vector<double> g2_error;
  /// Mean over 1 <= |d| <= max_offset of coincidences / shot_pairs.
  double normalization = 0.0;
  /// Fewer than two clicks; g2 is undefined.
  bool empty = true;

  std::size_t index(int offset) const { return static_cast<std::size_t>(offset + max_offset); }
  double g2_at(int offset) const { return g2.at(index(offset)); }
  double coincidences_at(int offset) const { return coincidences.at(index(offset)); }
};

CorrelationHistogram pulsed_g2(const ClickStream& stream, int max_offset);

/// Expected coincidences that involve at least one dark click.
struct DarkFloor {
  /// Expected such coincidences per shot pair; identical at every offset.
  double per_shot_pair = 0.0;
  /// per_shot_pair * (n_shots - |d|) for d = -max_offset..max_offset.
  std::vector<double> expected;
};

DarkFloor dark_count_floor(double signal_rate_per_shot, double dark_rate, double t_coll,
                           std::uint64_t n_shots, int max_offset);

/// Removes an uncorrelated background from g2: (g2_raw - (1 - rho^2)) / rho^2, clamped at 0.
double background_corrected_g2(double g2_raw, double rho);

/// Signal fraction S / (S + B) from mean clicks per shot and the dark-count expectation.
double signal_fraction(double clicks_per_shot, double dark_rate, double t_coll);

struct SpectralDiffusionMap {
  std::vector<double> frequencies;        // shared grid (Hz)
  std::vector<std::vector<double>> counts;  // [scan][frequency]
  std::vector<FitResult> scan_fits;
  std::vector<double> scan_fwhm;          // NaN where the scan fit failed
  Spectrum averaged;
  FitResult averaged_fit;
  double mean_scan_fwhm = 0.0;            // over scans whose fit converged
  double averaged_fwhm = 0.0;
};

SpectralDiffusionMap spectral_diffusion_map(const std::vector<Spectrum>& scans);

struct PurcellEstimate {
  double purcell = 0.0;
  double uncertainty = 0.0;
};

/// P = t1_0 / t1 - 1 with first-order propagation of both lifetime errors.
PurcellEstimate purcell_report(const FitResult& t1_fit, const FitResult& t1_0_fit);

/// FitResult carrying a known lifetime, for reporting literature or external values.
FitResult lifetime_result(double t1, double t1_error);

}  // namespace ersim
