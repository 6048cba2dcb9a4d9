#pragma once

// Shared experiment setups for the unit and acceptance suites.

#include "ersim/engine.hpp"
#include "ersim/physics.hpp"

namespace ersim::testing {

inline const double kIonFrequency = wavelength_to_frequency(1532.8e-9);
inline const double kGamma0 = 1.0 / 1.12e-3;  // ensemble lifetime without a cavity

/// Cavity-coupled ion on resonance: 1 us pulse, 20 us window, 60 us repetition.
inline ExperimentConfig cavity_ion(std::uint64_t shots = 100000, std::uint64_t seed = 1) {
  ExperimentConfig c;
  EmitterModel e;
  e.nu_ion_0 = kIonFrequency;
  e.gamma_0 = kGamma0;
  e.gamma_h = 50e6;
  e.p_max = 1.0;
  c.emitters = {e};
  c.cavity = CavityModel{kIonFrequency, 4.14e4, 460.0, "0.4 (lambda/n)^3", 0};
  c.detector = DetectorModel{1.0, 0.0, 0.0};
  c.sequence = PulseSequence{1e-6, 20e-6, 60e-6, shots};
  c.laser_frequencies = {kIonFrequency};
  c.master_seed = seed;
  return c;
}

/// Waveguide ensemble reference: no cavity, window long compared with 1.12 ms.
inline ExperimentConfig waveguide_ensemble(std::uint64_t shots = 100000, std::uint64_t seed = 2) {
  ExperimentConfig c = cavity_ion(shots, seed);
  c.cavity.reset();
  c.sequence = PulseSequence{1e-6, 10e-3, 12e-3, shots};
  return c;
}

}  // namespace ersim::testing
