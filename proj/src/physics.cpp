#include "ersim/physics.hpp"

#include <cmath>
#include <string>

#include "ersim/error.hpp"

namespace ersim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double wavelength_to_frequency(double wavelength_m) {
  require(wavelength_m > 0.0 && finite(wavelength_m), "wavelength must be positive");
  return kSpeedOfLight / wavelength_m;
}

double frequency_to_wavelength(double frequency_hz) {
  require(frequency_hz > 0.0 && finite(frequency_hz), "frequency must be positive");
  return kSpeedOfLight / frequency_hz;
}

void SpectralDiffusionParams::validate() const {
  require(sigma_fast >= 0.0 && finite(sigma_fast), "sigma_fast must be >= 0");
  require(tau_fast >= 0.0 && finite(tau_fast), "tau_fast must be >= 0");
  require(sigma_slow_rate >= 0.0 && finite(sigma_slow_rate), "sigma_slow_rate must be >= 0");
}

void EmitterModel::validate() const {
  require(nu_ion_0 > 0.0 && finite(nu_ion_0), "emitter frequency must be positive");
  require(gamma_0 > 0.0 && finite(gamma_0), "gamma_0 must be > 0");
  require(gamma_h > 0.0 && finite(gamma_h), "gamma_h must be > 0");
  require(p_max > 0.0 && p_max <= 1.0, "p_max must lie in (0, 1]");
  diffusion.validate();
}

double CavityModel::center() const {
  return nu_cav + 1e-3 * static_cast<double>(tuning_millihertz);
}

double CavityModel::fwhm() const { return cavity_fwhm_from_q(center(), q_factor); }

void CavityModel::validate() const {
  require(nu_cav > 0.0 && finite(nu_cav) && center() > 0.0, "cavity frequency must be positive");
  require(q_factor > 0.0 && finite(q_factor), "q_factor must be > 0");
  require(p_peak >= 0.0 && finite(p_peak), "p_peak must be >= 0");
}

void DetectorModel::validate() const {
  require(efficiency >= 0.0 && efficiency <= 1.0, "efficiency must lie in [0, 1]");
  require(dark_rate >= 0.0 && finite(dark_rate), "dark_rate must be >= 0");
  require(dead_time >= 0.0 && finite(dead_time), "dead_time must be >= 0");
}

double lorentzian(double nu, double center, double fwhm, double amplitude, double baseline) {
  require(fwhm > 0.0, "lorentzian fwhm must be > 0");
  const double hw = 0.5 * fwhm;
  const double d = nu - center;
  return baseline + amplitude * hw * hw / (d * d + hw * hw);
}

double gaussian(double nu, double center, double fwhm, double amplitude, double baseline) {
  require(fwhm > 0.0, "gaussian fwhm must be > 0");
  const double d = (nu - center) / fwhm;
  return baseline + amplitude * std::exp(-4.0 * std::log(2.0) * d * d);
}

double cavity_fwhm_from_q(double nu_cav, double q_factor) {
  require(q_factor > 0.0, "q_factor must be > 0");
  return nu_cav / q_factor;
}

double purcell_profile(double delta, double p_peak, double kappa) {
  require(kappa > 0.0, "cavity linewidth must be > 0");
  require(p_peak >= 0.0, "p_peak must be >= 0");
  const double x = 2.0 * delta / kappa;
  return p_peak / (1.0 + x * x);
}

double enhanced_decay_rate(double gamma_0, double p) {
  require(gamma_0 > 0.0, "gamma_0 must be > 0");
  require(p >= 0.0, "Purcell factor must be >= 0");
  return gamma_0 * (1.0 + p);
}

double purcell_from_lifetimes(double t1, double t1_0) {
  require(t1 > 0.0 && t1_0 > 0.0, "lifetimes must be > 0");
  return t1_0 / t1 - 1.0;
}

double radiative_linewidth(double t1) {
  require(t1 > 0.0, "lifetime must be > 0");
  return 1.0 / (2.0 * kPi * t1);
}

double cavity_branching_ratio(double p) {
  require(p >= 0.0, "Purcell factor must be >= 0");
  return p / (p + 1.0);
}

double excitation_probability(double delta_laser_ion, double gamma_h, double p_max) {
  require(gamma_h > 0.0, "gamma_h must be > 0");
  require(p_max > 0.0 && p_max <= 1.0, "p_max must lie in (0, 1]");
  const double hw2 = 0.25 * gamma_h * gamma_h;
  return p_max * hw2 / (hw2 + delta_laser_ion * delta_laser_ion);
}

CavityModel apply_tuning_step(const CavityModel& cavity, const TuningStep& step) {
  require(step.magnitude > 0.0 && finite(step.magnitude), "tuning step magnitude must be > 0");
  const auto shift = static_cast<std::int64_t>(std::llround(step.magnitude * 1e3));
  require(shift > 0, "tuning step magnitude below 1 mHz resolution");
  CavityModel out = cavity;
  switch (step.kind) {
    case TuningKind::AdsorbN2:
      out.tuning_millihertz -= shift;
      break;
    case TuningKind::HeatBlueshift:
      out.tuning_millihertz += shift;
      break;
  }
  return out;
}

}  // namespace ersim
