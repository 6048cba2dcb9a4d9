#include "ersim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "ersim/error.hpp"

namespace ersim {

namespace {

// Unit conversion between document numbers and SI values.
struct Unit {
  double (*to_si)(double);
  double (*from_si)(double);
};

constexpr Unit kUnitless{[](double v) { return v; }, [](double v) { return v; }};
constexpr Unit kTHz{[](double v) { return v * 1e12; }, [](double v) { return v / 1e12; }};
constexpr Unit kMHz{[](double v) { return v * 1e6; }, [](double v) { return v / 1e6; }};
constexpr Unit kMHz2PerS{[](double v) { return v * 1e12; }, [](double v) { return v / 1e12; }};
constexpr Unit kUs{[](double v) { return v / 1e6; }, [](double v) { return v * 1e6; }};
constexpr Unit kNs{[](double v) { return v / 1e9; }, [](double v) { return v * 1e9; }};
// Lifetime in ms on the page, decay rate in 1/s in the model.
constexpr Unit kLifetimeMs{[](double v) { return 1e3 / v; }, [](double v) { return 1e3 / v; }};

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Shortest decimal whose parsed value maps back onto `si` exactly, so that
// parse(serialize(x)) == x even through unit scaling.
std::string format_si(double si, const Unit& unit) {
  const double guess = unit.from_si(si);
  if (!std::isfinite(guess)) return shortest(guess);
  double lo = guess, hi = guess;
  for (int step = 0; step < 16; ++step) {
    for (double c : {lo, hi}) {
      const std::string s = shortest(c);
      double back = 0.0;
      std::from_chars(s.data(), s.data() + s.size(), back);
      if (unit.to_si(back) == si) return s;
    }
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, guess, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry, std::less<>> entries;
};

enum class Kind { Real, UInt, Int, Text };

struct KeySpec {
  const char* key;
  Kind kind;
  Unit unit;
  bool required;
};

const std::map<std::string, std::vector<KeySpec>, std::less<>>& schema() {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> s = {
      {"emitter",
       {{"nu_ion_thz", Kind::Real, kTHz, true},
        {"t1_0_ms", Kind::Real, kLifetimeMs, true},
        {"gamma_h_mhz", Kind::Real, kMHz, true},
        {"p_max", Kind::Real, kUnitless, false},
        {"sigma_fast_mhz", Kind::Real, kMHz, false},
        {"tau_fast_us", Kind::Real, kUs, false},
        {"sigma_slow_rate_mhz2_per_s", Kind::Real, kMHz2PerS, false}}},
      {"cavity",
       {{"nu_cav_thz", Kind::Real, kTHz, true},
        {"q_factor", Kind::Real, kUnitless, true},
        {"p_peak", Kind::Real, kUnitless, true},
        {"tuning_offset_millihertz", Kind::Int, kUnitless, false},
        {"mode_volume_note", Kind::Text, kUnitless, false}}},
      {"detector",
       {{"efficiency", Kind::Real, kUnitless, false},
        {"dark_rate_hz", Kind::Real, kUnitless, false},
        {"dead_time_ns", Kind::Real, kNs, false}}},
      {"sequence",
       {{"t_pulse_us", Kind::Real, kUs, true},
        {"t_coll_us", Kind::Real, kUs, true},
        {"t_rep_us", Kind::Real, kUs, true},
        {"n_shots", Kind::UInt, kUnitless, true}}},
      {"scan",
       {{"laser_thz", Kind::Real, kTHz, true},
        {"start_offset_mhz", Kind::Real, kMHz, false},
        {"stop_offset_mhz", Kind::Real, kMHz, false},
        {"points", Kind::UInt, kUnitless, false},
        {"repeats", Kind::UInt, kUnitless, false},
        {"inter_scan_dwell_s", Kind::Real, kUnitless, false}}},
      {"seed", {{"master_seed", Kind::UInt, kUnitless, false}}},
      {"source",
       {{"kind", Kind::Text, kUnitless, false},
        {"count", Kind::UInt, kUnitless, false},
        {"mean_photons_per_shot", Kind::Real, kUnitless, false}}},
  };
  return s;
}

// Key stem without its unit suffix, e.g. "t_pulse" for "t_pulse_us".
std::optional<std::string_view> unit_stem(std::string_view key) {
  static constexpr std::string_view suffixes[] = {"_mhz2_per_s", "_millihertz", "_thz", "_mhz",
                                                  "_hz", "_ms", "_us", "_ns", "_s"};
  for (auto suf : suffixes)
    if (key.size() > suf.size() && key.ends_with(suf)) return key.substr(0, key.size() - suf.size());
  return std::nullopt;
}

class Reader {
 public:
  explicit Reader(Section& s) : s_(s) {}

  void check_keys() const {
    const auto& specs = schema().at(s_.name);
    for (const auto& [key, entry] : s_.entries) {
      bool known = false;
      for (const auto& spec : specs) known = known || key == spec.key;
      if (known) continue;
      const auto stem = unit_stem(key);
      for (const auto& spec : specs) {
        const auto spec_stem = unit_stem(spec.key);
        if (stem && spec_stem && *stem == *spec_stem)
          throw ConfigError("unit-suffix mismatch: '" + key + "' should be '" + spec.key + "'",
                            s_.name, entry.line);
      }
      throw ConfigError("unknown key '" + key + "'", s_.name, entry.line);
    }
    for (const auto& spec : specs)
      if (spec.required && !s_.entries.contains(spec.key))
        throw ConfigError(std::string("missing required key '") + spec.key + "'", s_.name, s_.line);
  }

  double real(const char* key, double fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    double v = 0.0;
    const auto* end = e->value.data() + e->value.size();
    const auto res = std::from_chars(e->value.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
      throw ConfigError("'" + std::string(key) + "' is not a finite number", s_.name, e->line);
    return spec(key).unit.to_si(v);
  }

  std::uint64_t uint(const char* key, std::uint64_t fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto res = std::from_chars(e->value.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end)
      throw ConfigError("'" + std::string(key) + "' must be a non-negative integer", s_.name, e->line);
    return v;
  }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    std::int64_t v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto res = std::from_chars(e->value.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end)
      throw ConfigError("'" + std::string(key) + "' must be an integer", s_.name, e->line);
    return v;
  }

  std::string text(const char* key, std::string fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
  }

  unsigned small_uint(const char* key, unsigned fallback) const {
    const std::uint64_t v = uint(key, fallback);
    if (v > 0xffffffffu) throw ConfigError("'" + std::string(key) + "' is too large", s_.name, line(key));
    return static_cast<unsigned>(v);
  }

  int line(const char* key) const {
    const auto* e = find(key);
    return e ? e->line : s_.line;
  }

  [[noreturn]] void fail(const std::string& message, const char* key = nullptr) const {
    throw ConfigError(message, s_.name, key ? line(key) : s_.line);
  }

  template <class F>
  void guard(F&& validate, const char* key = nullptr) const {
    try {
      validate();
    } catch (const InvalidParameter& e) {
      fail(e.what(), key);
    }
  }

 private:
  const Entry* find(const char* key) const {
    const auto it = s_.entries.find(std::string_view(key));
    return it == s_.entries.end() ? nullptr : &it->second;
  }

  const KeySpec& spec(const char* key) const {
    for (const auto& k : schema().at(s_.name))
      if (std::string_view(k.key) == key) return k;
    throw std::logic_error("key missing from schema");
  }

  Section& s_;
};

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> sections;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", "", line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!schema().contains(name)) throw ConfigError("unknown section '" + name + "'", name, line_no);
      if (name != "emitter")
        for (const auto& s : sections)
          if (s.name == name) throw ConfigError("duplicate section", name, line_no);
      sections.push_back({name, line_no, {}});
      continue;
    }
    if (sections.empty()) throw ConfigError("key outside of any section", "", line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", sections.back().name, line_no);
    const std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError("empty key", sections.back().name, line_no);
    auto& entries = sections.back().entries;
    if (entries.contains(key)) throw ConfigError("duplicate key '" + key + "'", sections.back().name, line_no);
    entries.emplace(key, Entry{value, line_no, false});
  }
  return sections;
}

}  // namespace

std::vector<double> ScanSettings::grid() const {
  if (points == 1 && start_offset == 0.0 && stop_offset == 0.0) return {laser};
  if (points < 2) throw InvalidParameter("a scan needs at least 2 points");
  if (!(stop_offset > start_offset)) throw InvalidParameter("scan stop offset must exceed start offset");
  std::vector<double> g(points);
  const double step = (stop_offset - start_offset) / static_cast<double>(points - 1);
  for (unsigned i = 0; i < points; ++i) g[i] = laser + (start_offset + step * static_cast<double>(i));
  return g;
}

ConfigDocument parse_config_document(std::string_view text) {
  std::vector<Section> sections = split_sections(text);
  ConfigDocument doc;
  ExperimentConfig& cfg = doc.config;
  Section* sequence = nullptr;
  Section* scan = nullptr;

  for (Section& s : sections) {
    Reader r(s);
    r.check_keys();
    if (s.name == "emitter") {
      EmitterModel e;
      e.nu_ion_0 = r.real("nu_ion_thz", 0.0);
      e.gamma_0 = r.real("t1_0_ms", 0.0);
      e.gamma_h = r.real("gamma_h_mhz", 0.0);
      e.p_max = r.real("p_max", 1.0);
      e.diffusion.sigma_fast = r.real("sigma_fast_mhz", 0.0);
      e.diffusion.tau_fast = r.real("tau_fast_us", 0.0);
      e.diffusion.sigma_slow_rate = r.real("sigma_slow_rate_mhz2_per_s", 0.0);
      r.guard([&] { e.validate(); });
      cfg.emitters.push_back(e);
    } else if (s.name == "cavity") {
      CavityModel c;
      c.nu_cav = r.real("nu_cav_thz", 0.0);
      c.q_factor = r.real("q_factor", 0.0);
      c.p_peak = r.real("p_peak", 0.0);
      c.tuning_millihertz = r.integer("tuning_offset_millihertz", 0);
      c.mode_volume_note = r.text("mode_volume_note", "");
      r.guard([&] { c.validate(); });
      cfg.cavity = c;
    } else if (s.name == "detector") {
      cfg.detector.efficiency = r.real("efficiency", 1.0);
      cfg.detector.dark_rate = r.real("dark_rate_hz", 0.0);
      cfg.detector.dead_time = r.real("dead_time_ns", 0.0);
      r.guard([&] { cfg.detector.validate(); });
    } else if (s.name == "sequence") {
      sequence = &s;
      cfg.sequence.t_pulse = r.real("t_pulse_us", 0.0);
      cfg.sequence.t_coll = r.real("t_coll_us", 0.0);
      cfg.sequence.t_rep = r.real("t_rep_us", 0.0);
      cfg.sequence.n_shots = r.uint("n_shots", 0);
      r.guard([&] { cfg.sequence.validate(); });
    } else if (s.name == "scan") {
      scan = &s;
      doc.scan.laser = r.real("laser_thz", 0.0);
      doc.scan.start_offset = r.real("start_offset_mhz", 0.0);
      doc.scan.stop_offset = r.real("stop_offset_mhz", 0.0);
      doc.scan.points = r.small_uint("points", 1);
      cfg.scan_repeats = r.small_uint("repeats", 1);
      cfg.inter_scan_dwell = r.real("inter_scan_dwell_s", 0.0);
      r.guard([&] { cfg.laser_frequencies = doc.scan.grid(); });
    } else if (s.name == "seed") {
      cfg.master_seed = r.uint("master_seed", 0);
    } else if (s.name == "source") {
      const std::string kind = r.text("kind", "single");
      if (kind == "single") {
        cfg.source = SourceSpec::single();
      } else if (kind == "n_emitters") {
        cfg.source = SourceSpec::n_emitters(r.small_uint("count", 1));
      } else if (kind == "poissonian") {
        cfg.source = SourceSpec::poissonian(r.real("mean_photons_per_shot", 0.0));
      } else {
        r.fail("unknown source kind '" + kind + "' (single, n_emitters, poissonian)", "kind");
      }
    }
  }

  if (cfg.emitters.empty()) throw ConfigError("missing required section", "emitter", 0);
  if (!sequence) throw ConfigError("missing required section", "sequence", 0);
  if (!scan) throw ConfigError("missing required section", "scan", 0);
  try {
    cfg.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what(), "", 0);
  }
  return doc;
}

ExperimentConfig parse_config(std::string_view text) { return parse_config_document(text).config; }

std::string serialize_config(const ConfigDocument& doc) {
  const ExperimentConfig& c = doc.config;
  std::ostringstream os;
  const auto put = [&](const char* key, const std::string& v) { os << key << " = " << v << '\n'; };
  const auto real = [&](const char* key, double si, const Unit& u) { put(key, format_si(si, u)); };

  for (const auto& e : c.emitters) {
    os << "[emitter]\n";
    real("nu_ion_thz", e.nu_ion_0, kTHz);
    real("t1_0_ms", e.gamma_0, kLifetimeMs);
    real("gamma_h_mhz", e.gamma_h, kMHz);
    real("p_max", e.p_max, kUnitless);
    real("sigma_fast_mhz", e.diffusion.sigma_fast, kMHz);
    real("tau_fast_us", e.diffusion.tau_fast, kUs);
    real("sigma_slow_rate_mhz2_per_s", e.diffusion.sigma_slow_rate, kMHz2PerS);
    os << '\n';
  }
  if (c.cavity) {
    os << "[cavity]\n";
    real("nu_cav_thz", c.cavity->nu_cav, kTHz);
    real("q_factor", c.cavity->q_factor, kUnitless);
    real("p_peak", c.cavity->p_peak, kUnitless);
    put("tuning_offset_millihertz", std::to_string(c.cavity->tuning_millihertz));
    put("mode_volume_note", '"' + c.cavity->mode_volume_note + '"');
    os << '\n';
  }
  os << "[detector]\n";
  real("efficiency", c.detector.efficiency, kUnitless);
  real("dark_rate_hz", c.detector.dark_rate, kUnitless);
  real("dead_time_ns", c.detector.dead_time, kNs);
  os << "\n[sequence]\n";
  real("t_pulse_us", c.sequence.t_pulse, kUs);
  real("t_coll_us", c.sequence.t_coll, kUs);
  real("t_rep_us", c.sequence.t_rep, kUs);
  put("n_shots", std::to_string(c.sequence.n_shots));
  os << "\n[scan]\n";
  real("laser_thz", doc.scan.laser, kTHz);
  real("start_offset_mhz", doc.scan.start_offset, kMHz);
  real("stop_offset_mhz", doc.scan.stop_offset, kMHz);
  put("points", std::to_string(doc.scan.points));
  put("repeats", std::to_string(c.scan_repeats));
  real("inter_scan_dwell_s", c.inter_scan_dwell, kUnitless);
  os << "\n[seed]\n";
  put("master_seed", std::to_string(c.master_seed));
  os << "\n[source]\n";
  switch (c.source.kind) {
    case SourceKind::SingleEmitter:
      put("kind", "single");
      break;
    case SourceKind::NEmitters:
      put("kind", "n_emitters");
      put("count", std::to_string(c.source.count));
      break;
    case SourceKind::Poissonian:
      put("kind", "poissonian");
      real("mean_photons_per_shot", c.source.mean_photons_per_shot, kUnitless);
      break;
  }
  return os.str();
}

ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_document(ss.str());
}

}  // namespace ersim
