#include "ersim/clickstream.hpp"

#include <cmath>
#include <sstream>

#include "ersim/error.hpp"

namespace ersim {

void PulseSequence::validate() const {
  if (!(t_pulse > 0.0) || !std::isfinite(t_pulse)) throw InvalidParameter("t_pulse must be > 0");
  if (!(t_coll > 0.0) || !std::isfinite(t_coll)) throw InvalidParameter("t_coll must be > 0");
  if (!std::isfinite(t_rep) || t_pulse + t_coll > t_rep)
    throw InvalidParameter("pulse plus collection window exceeds the repetition period");
  if (n_shots < 1) throw InvalidParameter("n_shots must be >= 1");
}

StreamCheck validate_clickstream(const ClickStream& stream, double dead_time) {
  const auto fail = [](std::size_t i, const std::string& what) {
    std::ostringstream os;
    os << "record " << i << ": " << what;
    return StreamCheck{false, os.str()};
  };
  const PulseSequence& seq = stream.sequence;
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const Click& c = stream.records[i];
    if (!std::isfinite(c.t)) return fail(i, "non-finite time");
    if (c.shot >= seq.n_shots) return fail(i, "shot index beyond n_shots");
    if (c.t < seq.window_start()) return fail(i, "click inside the gated pulse");
    if (c.t >= seq.window_end()) return fail(i, "click after the collection window");
    if (c.t >= seq.t_rep) return fail(i, "click beyond the repetition period");
    if (i > 0) {
      const Click& prev = stream.records[i - 1];
      if (c < prev) return fail(i, "records out of order");
      if (c.shot == prev.shot && c.t - prev.t < dead_time) return fail(i, "dead time violated");
    }
  }
  return {};
}

}  // namespace ersim
