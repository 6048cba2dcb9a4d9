#pragma once

// Shot-by-shot Monte Carlo of the gated, pulsed excitation experiment.
//
// Each shot: the laser excites every emitter with an incoherent Lorentzian
// probability evaluated at its instantaneous (diffusing) frequency; an excited
// emitter decays once with the Purcell-enhanced rate, measured from the end of
// the pulse; the photon reaches the detector with probability beta * efficiency
// if it arrives inside the collection window; Poisson dark counts are added
// over the window; dead-time filtering is applied last.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ersim/clickstream.hpp"
#include "ersim/physics.hpp"
#include "ersim/random.hpp"

namespace ersim {

enum class SourceKind { SingleEmitter, NEmitters, Poissonian };

struct SourceSpec {
  SourceKind kind = SourceKind::SingleEmitter;
  unsigned count = 1;                  // NEmitters
  double mean_photons_per_shot = 0.0;  // Poissonian: emitted photons per shot

  static SourceSpec single() { return {}; }
  static SourceSpec n_emitters(unsigned k) { return {SourceKind::NEmitters, k, 0.0}; }
  static SourceSpec poissonian(double mean) { return {SourceKind::Poissonian, 1, mean}; }
};

struct ExperimentConfig {
  /// One entry, or one per emitter for NEmitters. A single entry is replicated k times.
  std::vector<EmitterModel> emitters;
  /// Absent for a bare waveguide: no enhancement and every photon is routed to the detector.
  std::optional<CavityModel> cavity;
  DetectorModel detector;
  PulseSequence sequence;
  /// Single entry for lifetime / g2 runs; strictly increasing grid for PLE scans.
  std::vector<double> laser_frequencies;
  unsigned scan_repeats = 1;
  double inter_scan_dwell = 0.0;  // s of diffusion between scan repetitions
  std::uint64_t master_seed = 0;
  SourceSpec source;

  void validate() const;
  /// The emitters actually simulated, after NEmitters replication.
  std::vector<EmitterModel> active_emitters() const;
};

/// Stable 64-bit digest of every simulation-relevant field.
std::uint64_t config_digest(const ExperimentConfig& config);

struct RunOptions {
  unsigned threads = 1;
};

struct DiffusionState {
  double nu_offset_fast = 0.0;  // Hz
  double nu_offset_slow = 0.0;  // Hz
  double wall_time = 0.0;       // s

  double offset() const { return nu_offset_fast + nu_offset_slow; }
};

/// Fast component drawn from its stationary law, slow component at zero.
DiffusionState initial_diffusion_state(const SpectralDiffusionParams& params, CounterRng& rng);

/// Exact Ornstein-Uhlenbeck step for the fast offset, Gaussian random-walk step for the slow one.
DiffusionState evolve_diffusion(const DiffusionState& state, double dt,
                                const SpectralDiffusionParams& params, CounterRng& rng);

/// Purcell factor, total decay rate and detector routing for one emitter at a given frequency.
struct EmissionChannel {
  double purcell = 0.0;
  double decay_rate = 0.0;
  double routing = 1.0;  // probability a decay photon is sent towards the detector
};

EmissionChannel emission_channel(const ExperimentConfig& config, const EmitterModel& emitter,
                                 double ion_frequency);

/// Click times (s from shot start, sorted, dead-time filtered) for one shot.
/// `states` holds one diffusion state per active emitter; `shot_key` addresses the RNG substream.
std::vector<double> sample_shot(const ExperimentConfig& config, double laser_frequency,
                                std::uint64_t shot_key, std::span<const DiffusionState> states);

ClickStream run_lifetime(const ExperimentConfig& config, const RunOptions& options = {});
ClickStream run_g2(const ExperimentConfig& config, const RunOptions& options = {});

struct PlePoint {
  double laser_frequency = 0.0;
  std::uint64_t total_counts = 0;
  ClickStream stream;
};

struct PleScan {
  unsigned repeat = 0;
  double start_wall_time = 0.0;
  double end_wall_time = 0.0;
  std::vector<PlePoint> points;
};

/// Runs `scan_repeats` sweeps over the laser grid with continuous diffusion.
std::vector<PleScan> run_ple_scan(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace ersim
