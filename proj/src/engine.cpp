#include "ersim/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

#include "ersim/error.hpp"

namespace ersim {

void ExperimentConfig::validate() const {
  if (emitters.empty()) throw InvalidParameter("at least one emitter is required");
  for (const auto& e : emitters) e.validate();
  if (cavity) cavity->validate();
  detector.validate();
  sequence.validate();
  if (laser_frequencies.empty()) throw InvalidParameter("laser frequency grid is empty");
  for (std::size_t i = 0; i < laser_frequencies.size(); ++i) {
    if (!(laser_frequencies[i] > 0.0) || !std::isfinite(laser_frequencies[i]))
      throw InvalidParameter("laser frequencies must be positive");
    if (i > 0 && !(laser_frequencies[i] > laser_frequencies[i - 1]))
      throw InvalidParameter("laser scan grid must be strictly increasing");
  }
  if (scan_repeats < 1) throw InvalidParameter("scan_repeats must be >= 1");
  if (!(inter_scan_dwell >= 0.0) || !std::isfinite(inter_scan_dwell))
    throw InvalidParameter("inter-scan dwell must be >= 0");
  switch (source.kind) {
    case SourceKind::SingleEmitter:
      break;
    case SourceKind::NEmitters:
      if (source.count < 1) throw InvalidParameter("NEmitters requires k >= 1");
      if (emitters.size() != 1 && emitters.size() != source.count)
        throw InvalidParameter("NEmitters(k) needs one emitter template or exactly k emitters");
      break;
    case SourceKind::Poissonian:
      if (!(source.mean_photons_per_shot >= 0.0) || !std::isfinite(source.mean_photons_per_shot))
        throw InvalidParameter("Poissonian mean must be >= 0");
      break;
  }
}

std::vector<EmitterModel> ExperimentConfig::active_emitters() const {
  switch (source.kind) {
    case SourceKind::NEmitters:
      if (emitters.size() == 1) return std::vector<EmitterModel>(source.count, emitters.front());
      return emitters;
    case SourceKind::SingleEmitter:
    case SourceKind::Poissonian:
      break;
  }
  return {emitters.front()};
}

namespace {

struct Digest {
  std::uint64_t h = 0x45525454'00000001ull;
  void add(std::uint64_t v) { h = mix64(h ^ v); }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

std::uint64_t config_digest(const ExperimentConfig& c) {
  Digest d;
  d.add(static_cast<std::uint64_t>(c.emitters.size()));
  for (const auto& e : c.emitters) {
    for (double v : {e.nu_ion_0, e.gamma_0, e.gamma_h, e.p_max, e.diffusion.sigma_fast,
                     e.diffusion.tau_fast, e.diffusion.sigma_slow_rate})
      d.add(v);
  }
  d.add(static_cast<std::uint64_t>(c.cavity.has_value()));
  if (c.cavity) {
    d.add(c.cavity->nu_cav);
    d.add(c.cavity->q_factor);
    d.add(c.cavity->p_peak);
    d.add(static_cast<std::uint64_t>(c.cavity->tuning_millihertz));
  }
  for (double v : {c.detector.efficiency, c.detector.dark_rate, c.detector.dead_time,
                   c.sequence.t_pulse, c.sequence.t_coll, c.sequence.t_rep})
    d.add(v);
  d.add(c.sequence.n_shots);
  d.add(static_cast<std::uint64_t>(c.laser_frequencies.size()));
  for (double f : c.laser_frequencies) d.add(f);
  d.add(static_cast<std::uint64_t>(c.scan_repeats));
  d.add(c.inter_scan_dwell);
  d.add(c.master_seed);
  d.add(static_cast<std::uint64_t>(c.source.kind));
  d.add(static_cast<std::uint64_t>(c.source.count));
  d.add(c.source.mean_photons_per_shot);
  return d.h;
}

DiffusionState initial_diffusion_state(const SpectralDiffusionParams& params, CounterRng& rng) {
  DiffusionState s;
  if (params.sigma_fast > 0.0) s.nu_offset_fast = params.sigma_fast * rng.standard_normal();
  return s;
}

DiffusionState evolve_diffusion(const DiffusionState& state, double dt,
                                const SpectralDiffusionParams& params, CounterRng& rng) {
  if (!(dt >= 0.0)) throw InvalidParameter("diffusion step must be >= 0");
  DiffusionState next = state;
  next.wall_time += dt;
  if (dt == 0.0) return next;
  if (params.sigma_fast > 0.0) {
    // tau_fast == 0 is the white-noise limit: every step is a fresh stationary draw.
    const double decay = params.tau_fast > 0.0 ? std::exp(-dt / params.tau_fast) : 0.0;
    const double spread = params.sigma_fast * std::sqrt(-std::expm1(-2.0 * dt / params.tau_fast));
    next.nu_offset_fast = state.nu_offset_fast * decay + spread * rng.standard_normal();
  }
  if (params.sigma_slow_rate > 0.0)
    next.nu_offset_slow += std::sqrt(params.sigma_slow_rate * dt) * rng.standard_normal();
  return next;
}

EmissionChannel emission_channel(const ExperimentConfig& config, const EmitterModel& emitter,
                                 double ion_frequency) {
  EmissionChannel ch;
  if (config.cavity) {
    ch.purcell = purcell_profile(ion_frequency - config.cavity->center(), config.cavity->p_peak,
                                 config.cavity->fwhm());
    ch.routing = cavity_branching_ratio(ch.purcell);
  }
  ch.decay_rate = enhanced_decay_rate(emitter.gamma_0, ch.purcell);
  return ch;
}

namespace {

// Everything a worker needs to sample shots; immutable once built.
struct ShotKernel {
  const ExperimentConfig& config;
  const std::vector<EmitterModel>& emitters;
  double laser;

  void sample(std::uint64_t key, std::span<const double> offsets, std::vector<double>& out) const {
    const PulseSequence& seq = config.sequence;
    const DetectorModel& det = config.detector;
    const double start = seq.window_start();
    const double end = seq.window_end();
    CounterRng rng(config.master_seed, RngDomain::Shot, key);
    out.clear();

    const auto emit = [&](const EmissionChannel& ch) {
      const double t = start + rng.exponential(ch.decay_rate);
      const bool detected = rng.uniform() < ch.routing * det.efficiency;
      if (detected && t < end) out.push_back(t);
    };

    if (config.source.kind == SourceKind::Poissonian) {
      const EmitterModel& e = emitters.front();
      const EmissionChannel ch = emission_channel(config, e, e.nu_ion_0 + offsets[0]);
      const std::uint64_t n = rng.poisson(config.source.mean_photons_per_shot);
      for (std::uint64_t i = 0; i < n; ++i) emit(ch);
    } else {
      for (std::size_t k = 0; k < emitters.size(); ++k) {
        const EmitterModel& e = emitters[k];
        const double ion = e.nu_ion_0 + offsets[k];
        const double p = excitation_probability(laser - ion, e.gamma_h, e.p_max);
        if (rng.uniform() < p) emit(emission_channel(config, e, ion));
      }
    }

    if (det.dark_rate > 0.0) {
      const std::uint64_t n = rng.poisson(det.dark_rate * seq.t_coll);
      for (std::uint64_t i = 0; i < n; ++i) {
        double t = start + rng.uniform() * seq.t_coll;
        if (t >= end) t = std::nextafter(end, start);
        out.push_back(t);
      }
    }

    if (out.size() > 1) {
      std::sort(out.begin(), out.end());
      if (det.dead_time > 0.0) {
        std::size_t kept = 1;
        for (std::size_t i = 1; i < out.size(); ++i) {
          if (out[i] - out[kept - 1] >= det.dead_time) out[kept++] = out[i];
        }
        out.resize(kept);
      }
    }
  }
};

// Diffusion of all emitters, advanced serially so the trajectory never depends on threading.
class DiffusionTracker {
 public:
  DiffusionTracker(const ExperimentConfig& config, const std::vector<EmitterModel>& emitters)
      : emitters_(emitters) {
    for (std::size_t k = 0; k < emitters.size(); ++k) {
      rngs_.emplace_back(config.master_seed, RngDomain::Diffusion, k);
      states_.push_back(initial_diffusion_state(emitters[k].diffusion, rngs_.back()));
      dynamic_ = dynamic_ || !emitters[k].diffusion.is_static();
    }
  }

  bool dynamic() const { return dynamic_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<DiffusionState>& states() const { return states_; }

  void advance(double dt) {
    for (std::size_t k = 0; k < states_.size(); ++k)
      states_[k] = evolve_diffusion(states_[k], dt, emitters_[k].diffusion, rngs_[k]);
  }

  /// Offsets seen by each of the next n shots (shot-major), advancing by t_rep after each.
  std::vector<double> trajectory(std::uint64_t n, double t_rep) {
    std::vector<double> out;
    if (!dynamic_) {
      for (auto& s : states_) s.wall_time += static_cast<double>(n) * t_rep;
      return out;
    }
    out.resize(n * states_.size());
    for (std::uint64_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < states_.size(); ++k) out[i * states_.size() + k] = states_[k].offset();
      advance(t_rep);
    }
    return out;
  }

  double wall_time() const { return states_.front().wall_time; }

 private:
  const std::vector<EmitterModel>& emitters_;
  std::vector<CounterRng> rngs_;
  std::vector<DiffusionState> states_;
  bool dynamic_ = false;
};

// Samples n shots with RNG keys first_key.. and local shot indices 0..n-1.
ClickStream run_block(const ExperimentConfig& config, const std::vector<EmitterModel>& emitters,
                      DiffusionTracker& diffusion, double laser, std::uint64_t first_key,
                      std::uint64_t n, unsigned threads) {
  const std::vector<double> traj = diffusion.trajectory(n, config.sequence.t_rep);
  const std::size_t width = diffusion.size();
  const std::vector<double> zeros(width, 0.0);
  const ShotKernel kernel{config, emitters, laser};

  const auto work = [&](std::uint64_t begin, std::uint64_t end, std::vector<Click>& out) {
    std::vector<double> times;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::span<const double> offsets =
          traj.empty() ? std::span<const double>(zeros)
                       : std::span<const double>(traj.data() + i * width, width);
      kernel.sample(first_key + i, offsets, times);
      for (double t : times) out.push_back({i, t});
    }
  };

  ClickStream stream;
  stream.sequence = config.sequence;
  stream.sequence.n_shots = n;
  stream.config_digest = config_digest(config);

  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(n / 1024, 1)));
  if (workers <= 1) {
    work(0, n, stream.records);
    return stream;
  }
  std::vector<std::vector<Click>> parts(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = n * w / workers;
      const std::uint64_t end = n * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] { work(begin, end, parts[w]); });
    }
  }
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  stream.records.reserve(total);
  for (const auto& p : parts) stream.records.insert(stream.records.end(), p.begin(), p.end());
  return stream;
}

ClickStream run_fixed_laser(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  if (config.laser_frequencies.size() != 1)
    throw InvalidParameter("lifetime and g2 runs need a single laser frequency");
  const auto emitters = config.active_emitters();
  DiffusionTracker diffusion(config, emitters);
  return run_block(config, emitters, diffusion, config.laser_frequencies.front(), 0,
                   config.sequence.n_shots, options.threads);
}

}  // namespace

std::vector<double> sample_shot(const ExperimentConfig& config, double laser_frequency,
                                std::uint64_t shot_key, std::span<const DiffusionState> states) {
  const auto emitters = config.active_emitters();
  if (states.size() != emitters.size())
    throw InvalidParameter("need one diffusion state per active emitter");
  std::vector<double> offsets;
  for (const auto& s : states) offsets.push_back(s.offset());
  std::vector<double> out;
  ShotKernel{config, emitters, laser_frequency}.sample(shot_key, offsets, out);
  return out;
}

ClickStream run_lifetime(const ExperimentConfig& config, const RunOptions& options) {
  return run_fixed_laser(config, options);
}

ClickStream run_g2(const ExperimentConfig& config, const RunOptions& options) {
  return run_fixed_laser(config, options);
}

std::vector<PleScan> run_ple_scan(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto emitters = config.active_emitters();
  DiffusionTracker diffusion(config, emitters);
  const std::uint64_t n = config.sequence.n_shots;
  const std::uint64_t grid = config.laser_frequencies.size();

  std::vector<PleScan> scans;
  for (unsigned r = 0; r < config.scan_repeats; ++r) {
    PleScan scan;
    scan.repeat = r;
    scan.start_wall_time = diffusion.wall_time();
    for (std::uint64_t j = 0; j < grid; ++j) {
      PlePoint point;
      point.laser_frequency = config.laser_frequencies[j];
      point.stream = run_block(config, emitters, diffusion, point.laser_frequency,
                               (r * grid + j) * n, n, options.threads);
      point.total_counts = point.stream.size();
      scan.points.push_back(std::move(point));
    }
    scan.end_wall_time = diffusion.wall_time();
    scans.push_back(std::move(scan));
    if (r + 1 < config.scan_repeats && config.inter_scan_dwell > 0.0)
      diffusion.advance(config.inter_scan_dwell);
  }
  return scans;
}

}  // namespace ersim
