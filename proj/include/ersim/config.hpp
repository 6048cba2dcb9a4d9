#pragma once

// INI-style configuration documents. Every physical quantity carries its unit
// in the key name (t_pulse_us, nu_cav_thz, dark_rate_hz, ...).
//
//   [emitter]          nu_ion_thz, t1_0_ms, gamma_h_mhz, p_max, sigma_fast_mhz,
//                      tau_fast_us, sigma_slow_rate_mhz2_per_s      (repeatable)
//   [cavity]           nu_cav_thz, q_factor, p_peak, tuning_offset_millihertz,
//                      mode_volume_note                             (optional)
//   [detector]         efficiency, dark_rate_hz, dead_time_ns       (optional)
//   [sequence]         t_pulse_us, t_coll_us, t_rep_us, n_shots
//   [scan]             laser_thz, start_offset_mhz, stop_offset_mhz, points,
//                      repeats, inter_scan_dwell_s
//   [seed]             master_seed                                  (optional)
//   [source]           kind = single | n_emitters | poissonian, count,
//                      mean_photons_per_shot                        (optional)

#include <string>
#include <string_view>
#include <vector>

#include "ersim/engine.hpp"

namespace ersim {

/// Laser settings as written in the document; expands into the absolute grid.
struct ScanSettings {
  double laser = 0.0;         // Hz; scan center or the fixed laser frequency
  double start_offset = 0.0;  // Hz relative to laser
  double stop_offset = 0.0;   // Hz relative to laser
  unsigned points = 1;

  std::vector<double> grid() const;
};

struct ConfigDocument {
  ExperimentConfig config;
  ScanSettings scan;
};

/// Parses and fully validates a document. Throws ConfigError with line/section context.
ConfigDocument parse_config_document(std::string_view text);
ExperimentConfig parse_config(std::string_view text);

/// Canonical text form; parse(serialize(doc)) reproduces doc exactly.
std::string serialize_config(const ConfigDocument& doc);

ConfigDocument load_config(const std::string& path);

}  // namespace ersim
