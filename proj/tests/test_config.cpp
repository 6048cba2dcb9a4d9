#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "ersim/config.hpp"
#include "ersim/error.hpp"

using namespace ersim;

namespace {

const std::string kMinimal = R"(
[emitter]
nu_ion_thz = 195.58
t1_0_ms = 1.12
gamma_h_mhz = 50

[sequence]
t_pulse_us = 1.0
t_coll_us = 20
t_rep_us = 60
n_shots = 1000

[scan]
laser_thz = 195.58
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("document was accepted: " << text);
  return ConfigError("", "", 0);
}

bool same(const ConfigDocument& a, const ConfigDocument& b) {
  return serialize_config(a) == serialize_config(b) && config_digest(a.config) == config_digest(b.config) &&
         a.config.laser_frequencies == b.config.laser_frequencies;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal document gets defaults") {
    const ConfigDocument doc = parse_config_document(kMinimal);
    const ExperimentConfig& c = doc.config;
    REQUIRE(c.emitters.size() == 1);
    CHECK(c.emitters[0].nu_ion_0 == 195.58e12);
    CHECK(c.emitters[0].gamma_0 == doctest::Approx(1.0 / 1.12e-3));
    CHECK(c.emitters[0].p_max == 1.0);
    CHECK(c.emitters[0].diffusion.is_static());
    CHECK_FALSE(c.cavity.has_value());
    CHECK(c.detector.efficiency == 1.0);
    CHECK(c.detector.dark_rate == 0.0);
    CHECK(c.detector.dead_time == 0.0);
    CHECK(c.sequence.t_pulse == 1e-6);
    CHECK(c.sequence.t_coll == 20e-6);
    CHECK(c.sequence.t_rep == 60e-6);
    CHECK(c.sequence.n_shots == 1000);
    CHECK(c.laser_frequencies == std::vector<double>{195.58e12});
    CHECK(c.scan_repeats == 1);
    CHECK(c.master_seed == 0);
    CHECK(c.source.kind == SourceKind::SingleEmitter);
  }

  TEST_CASE("pulse longer than the repetition period") {
    const ConfigError e = config_error(replace(kMinimal, "t_pulse_us = 1.0", "t_pulse_us = 70"));
    CHECK(e.section() == "sequence");
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }

  TEST_CASE("diagnostics carry section and line") {
    ConfigError e = config_error(replace(kMinimal, "gamma_h_mhz = 50", "gamma_h_mhz = 50\ncolour = red"));
    CHECK(e.section() == "emitter");
    CHECK(e.line() == 6);
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);

    e = config_error(replace(kMinimal, "t_pulse_us = 1.0", "t_pulse_ms = 0.001"));
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("unit") != std::string::npos);

    e = config_error(replace(kMinimal, "n_shots = 1000\n", ""));
    CHECK(e.section() == "sequence");
    CHECK(std::string(e.what()).find("n_shots") != std::string::npos);

    e = config_error(replace(kMinimal, "[scan]\nlaser_thz = 195.58\n", ""));
    CHECK(e.section() == "scan");

    e = config_error(kMinimal + "\n[laser]\npower_mw = 1\n");
    CHECK(std::string(e.what()).find("unknown section") != std::string::npos);

    e = config_error(kMinimal + "\n[sequence]\nn_shots = 2\n");
    CHECK(std::string(e.what()).find("duplicate section") != std::string::npos);

    e = config_error(replace(kMinimal, "n_shots = 1000", "n_shots = 1000\nn_shots = 5"));
    CHECK(std::string(e.what()).find("duplicate key") != std::string::npos);

    e = config_error(replace(kMinimal, "n_shots = 1000", "n_shots = -4"));
    CHECK(e.line() == 11);

    e = config_error(replace(kMinimal, "gamma_h_mhz = 50", "gamma_h_mhz = fifty"));
    CHECK(e.line() == 5);

    e = config_error(replace(kMinimal, "gamma_h_mhz = 50", "gamma_h_mhz = 0"));
    CHECK(e.section() == "emitter");

    e = config_error(kMinimal + "\n[source]\nkind = laser\n");
    CHECK(e.section() == "source");
    CHECK_THROWS_AS(parse_config("nu_ion_thz = 1\n"), ConfigError);
  }

  TEST_CASE("standard pulse sequence is accepted") {
    const ExperimentConfig c = parse_config(kMinimal);
    CHECK(c.sequence.t_pulse == 1.0e-6);
    CHECK(c.sequence.t_rep == 60e-6);
    CHECK(c.sequence.t_coll == 20e-6);
  }

  TEST_CASE("scan grid expansion") {
    const std::string text =
        replace(kMinimal, "laser_thz = 195.58", "laser_thz = 195.58\nstart_offset_mhz = -500\nstop_offset_mhz = 500\npoints = 11");
    const ExperimentConfig c = parse_config(text);
    REQUIRE(c.laser_frequencies.size() == 11);
    CHECK(c.laser_frequencies.front() == 195.58e12 - 500e6);
    CHECK(c.laser_frequencies.back() == 195.58e12 + 500e6);
    CHECK_THROWS_AS(parse_config(replace(text, "points = 11", "points = 1")), ConfigError);
  }

  TEST_CASE("serialize then parse is the identity on the corpus") {
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(ERSIM_TEST_DATA_DIR)) {
      if (entry.path().extension() != ".ini") continue;
      ++files;
      CAPTURE(entry.path().string());
      const ConfigDocument doc = load_config(entry.path().string());
      const std::string text = serialize_config(doc);
      const ConfigDocument again = parse_config_document(text);
      CHECK(same(doc, again));
      CHECK(serialize_config(again) == text);
    }
    CHECK(files >= 4);
  }

  TEST_CASE("parse, serialize, parse is exact for awkward values") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto num = [&](double lo, double hi) {
      std::ostringstream os;
      os.precision(17);
      os << lo + (hi - lo) * u(gen);
      return os.str();
    };
    for (int i = 0; i < 300; ++i) {
      const std::string text = "[emitter]\nnu_ion_thz = " + num(190, 200) + "\nt1_0_ms = " + num(1e-3, 2) +
                               "\ngamma_h_mhz = " + num(1e-3, 1e3) + "\np_max = " + num(0.01, 1) +
                               "\nsigma_fast_mhz = " + num(0, 100) + "\ntau_fast_us = " + num(0, 10) +
                               "\nsigma_slow_rate_mhz2_per_s = " + num(0, 10) + "\n[detector]\ndead_time_ns = " +
                               num(0, 100) + "\n[sequence]\nt_pulse_us = " + num(0.1, 2) + "\nt_coll_us = " +
                               num(1, 50) + "\nt_rep_us = 60\nn_shots = 7\n[scan]\nlaser_thz = " + num(190, 200) +
                               "\nstart_offset_mhz = -" + num(1, 900) + "\nstop_offset_mhz = " + num(1, 900) +
                               "\npoints = 17\n";
      CAPTURE(text);
      const ConfigDocument doc = parse_config_document(text);
      const ConfigDocument back = parse_config_document(serialize_config(doc));
      const EmitterModel& e = doc.config.emitters[0];
      const EmitterModel& f = back.config.emitters[0];
      CHECK(f.nu_ion_0 == e.nu_ion_0);
      CHECK(f.gamma_0 == e.gamma_0);
      CHECK(f.gamma_h == e.gamma_h);
      CHECK(f.diffusion.sigma_fast == e.diffusion.sigma_fast);
      CHECK(f.diffusion.tau_fast == e.diffusion.tau_fast);
      CHECK(f.diffusion.sigma_slow_rate == e.diffusion.sigma_slow_rate);
      CHECK(back.config.detector.dead_time == doc.config.detector.dead_time);
      CHECK(back.config.sequence.t_pulse == doc.config.sequence.t_pulse);
      CHECK(back.config.sequence.t_coll == doc.config.sequence.t_coll);
      CHECK(back.config.laser_frequencies == doc.config.laser_frequencies);
      CHECK(config_digest(back.config) == config_digest(doc.config));
    }
  }

  TEST_CASE("multiple emitters and source kinds") {
    const ConfigDocument doc = load_config(std::string(ERSIM_TEST_DATA_DIR) + "/two_ions.ini");
    CHECK(doc.config.emitters.size() == 2);
    CHECK(doc.config.source.kind == SourceKind::NEmitters);
    CHECK(doc.config.source.count == 2);
    CHECK(doc.config.cavity->tuning_millihertz == -1500);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), IoError);
    const ExperimentConfig p = parse_config(kMinimal + "\n[source]\nkind = poissonian\nmean_photons_per_shot = 0.25\n");
    CHECK(p.source.kind == SourceKind::Poissonian);
    CHECK(p.source.mean_photons_per_shot == 0.25);
  }
}
