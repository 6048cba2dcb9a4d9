#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ersim {

/// Timing of one excitation shot: pulse, gated collection window, repetition.
struct PulseSequence {
  double t_pulse = 1e-6;  // s
  double t_coll = 20e-6;  // s
  double t_rep = 60e-6;   // s
  std::uint64_t n_shots = 1;

  double window_start() const { return t_pulse; }
  double window_end() const { return t_pulse + t_coll; }
  void validate() const;
};

struct Click {
  std::uint64_t shot = 0;
  double t = 0.0;  // time since shot start (s)

  friend bool operator==(const Click&, const Click&) = default;
  friend auto operator<=>(const Click&, const Click&) = default;
};

/// Time-tagged detector events, ordered by (shot, t).
struct ClickStream {
  std::vector<Click> records;
  PulseSequence sequence;
  std::uint64_t config_digest = 0;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct StreamCheck {
  bool ok = true;
  std::string message;
  explicit operator bool() const { return ok; }
};

/// Checks ordering, AOM gating, the collection window, shot range and dead time.
StreamCheck validate_clickstream(const ClickStream& stream, double dead_time = 0.0);

}  // namespace ersim
