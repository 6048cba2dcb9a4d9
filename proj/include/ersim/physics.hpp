#pragma once

// Closed-form physics of a single emitter in a Lorentzian optical cavity.
// Frequencies are absolute Hz, times are seconds, rates are 1/s.

#include <cstdint>
#include <string>

namespace ersim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Converts a vacuum wavelength (m) to an optical frequency (Hz).
double wavelength_to_frequency(double wavelength_m);
double frequency_to_wavelength(double frequency_hz);

struct SpectralDiffusionParams {
  double sigma_fast = 0.0;       // stationary std-dev of the fast jitter (Hz)
  double tau_fast = 0.0;         // correlation time of the fast jitter (s)
  double sigma_slow_rate = 0.0;  // diffusivity of the slow walk (Hz^2/s)

  bool is_static() const { return sigma_fast == 0.0 && sigma_slow_rate == 0.0; }
  void validate() const;
};

struct EmitterModel {
  double nu_ion_0 = 0.0;  // optical transition frequency (Hz)
  double gamma_0 = 0.0;   // cavity-free decay rate (1/s)
  double gamma_h = 0.0;   // homogeneous excitation FWHM (Hz)
  double p_max = 1.0;     // resonant per-pulse excitation probability
  SpectralDiffusionParams diffusion;

  void validate() const;
};

struct CavityModel {
  double nu_cav = 0.0;    // untuned center frequency (Hz)
  double q_factor = 1.0;
  double p_peak = 0.0;    // on-resonance Purcell factor
  std::string mode_volume_note;
  // Accumulated N2 adsorption / heating shift. Integer so that opposite steps cancel exactly.
  std::int64_t tuning_millihertz = 0;

  /// Current resonance including the tuning shift.
  double center() const;
  /// Linewidth kappa = center / Q.
  double fwhm() const;
  void validate() const;
};

struct DetectorModel {
  double efficiency = 1.0;  // detection probability per routed photon
  double dark_rate = 0.0;   // counts/s
  double dead_time = 0.0;   // s

  void validate() const;
};

enum class TuningKind { AdsorbN2, HeatBlueshift };

struct TuningStep {
  TuningKind kind = TuningKind::AdsorbN2;
  double magnitude = 0.0;  // Hz
};

/// baseline + amplitude * (fwhm/2)^2 / ((nu-center)^2 + (fwhm/2)^2)
double lorentzian(double nu, double center, double fwhm, double amplitude, double baseline);

/// baseline + amplitude * exp(-4 ln2 (nu-center)^2 / fwhm^2)
double gaussian(double nu, double center, double fwhm, double amplitude, double baseline);

double cavity_fwhm_from_q(double nu_cav, double q_factor);

/// Purcell factor of an emitter detuned by `delta` from a cavity of linewidth `kappa`.
double purcell_profile(double delta, double p_peak, double kappa);

/// Total decay rate gamma_0 * (1 + p).
double enhanced_decay_rate(double gamma_0, double p);

/// P = t1_0 / t1 - 1.
double purcell_from_lifetimes(double t1, double t1_0);

/// Lifetime-limited FWHM 1 / (2 pi t1).
double radiative_linewidth(double t1);

/// Fraction of an enhanced decay emitted into the cavity mode, P / (P + 1).
double cavity_branching_ratio(double p);

/// Incoherent saturating excitation: p_max * (gh/2)^2 / ((gh/2)^2 + delta^2).
double excitation_probability(double delta_laser_ion, double gamma_h, double p_max);

CavityModel apply_tuning_step(const CavityModel& cavity, const TuningStep& step);

}  // namespace ersim
