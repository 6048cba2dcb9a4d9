#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ersim/analysis.hpp"
#include "ersim/calibration.hpp"
#include "ersim/engine.hpp"
#include "ersim/error.hpp"
#include "fixtures.hpp"

using namespace ersim;
using namespace ersim::testing;

namespace {

double mean_clicks(const ClickStream& s) {
  return static_cast<double>(s.size()) / static_cast<double>(s.sequence.n_shots);
}

// Kolmogorov-Smirnov statistic of samples against Exponential(rate).
double ks_exponential(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("static diffusion only advances the clock") {
    CounterRng rng(5, RngDomain::Test, 0);
    const DiffusionState s{12.0, -3.0, 1.5};
    const DiffusionState next = evolve_diffusion(s, 0.25, {}, rng);
    CHECK(next.nu_offset_fast == 12.0);
    CHECK(next.nu_offset_slow == -3.0);
    CHECK(next.wall_time == 1.75);
    CHECK_THROWS_AS(evolve_diffusion(s, -1.0, {}, rng), InvalidParameter);
  }

  TEST_CASE("fast component reaches its stationary spread") {
    const SpectralDiffusionParams p{70e6, 1e-4, 0.0};
    CounterRng rng(6, RngDomain::Test, 0);
    DiffusionState s = initial_diffusion_state(p, rng);
    double sum = 0.0, sum2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      s = evolve_diffusion(s, 60e-6, p, rng);
      sum += s.nu_offset_fast;
      sum2 += s.nu_offset_fast * s.nu_offset_fast;
    }
    const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
    CHECK(std::abs(sd / 70e6 - 1.0) < 0.03);
    CHECK(s.wall_time == doctest::Approx(n * 60e-6));
  }

  TEST_CASE("slow component variance grows linearly in time") {
    const SpectralDiffusionParams p{0.0, 0.0, 2.5e12};
    const double total = 300.0;
    const int steps = 50, trajectories = 10000;
    double sum2 = 0.0;
    for (int k = 0; k < trajectories; ++k) {
      CounterRng rng(7, RngDomain::Test, static_cast<std::uint64_t>(k));
      DiffusionState s;
      for (int i = 0; i < steps; ++i) s = evolve_diffusion(s, total / steps, p, rng);
      sum2 += s.nu_offset_slow * s.nu_offset_slow;
    }
    CHECK(std::abs(sum2 / trajectories / (2.5e12 * total) - 1.0) < 0.05);
  }

  TEST_CASE("no detection means no clicks") {
    ExperimentConfig c = cavity_ion(20000);
    c.detector.efficiency = 0.0;
    CHECK(run_lifetime(c).empty());
    ExperimentConfig far = cavity_ion(20000);
    far.laser_frequencies = {kIonFrequency + 5e12};
    CHECK(run_lifetime(far).empty());
    ExperimentConfig bad = cavity_ion(10);
    bad.emitters[0].p_max = 0.0;
    CHECK_THROWS_AS(run_lifetime(bad), InvalidParameter);
  }

  TEST_CASE("resonant detection probability equals p_max") {
    ExperimentConfig c = cavity_ion(1000000);
    c.emitters[0].p_max = 0.3;
    c.cavity->p_peak = 1e6;
    c.sequence = PulseSequence{1e-6, 58e-6, 60e-6, 1000000};
    CHECK(std::abs(mean_clicks(run_lifetime(c)) / 0.3 - 1.0) < 0.02);
  }

  TEST_CASE("dark counts alone are Poisson with mean rate * window") {
    ExperimentConfig c = cavity_ion(1000000);
    c.detector = DetectorModel{0.0, 25000.0, 0.0};
    const ClickStream s = run_lifetime(c);
    CHECK(std::abs(mean_clicks(s) / (25000.0 * 20e-6) - 1.0) < 0.02);
    CHECK(validate_clickstream(s));
  }

  TEST_CASE("finite window Bernoulli mean") {
    ExperimentConfig c = cavity_ion(400000);
    c.emitters[0].p_max = 0.6;
    c.detector.efficiency = 0.4;
    c.sequence = PulseSequence{1e-6, 3e-6, 60e-6, 400000};
    const EmissionChannel ch = emission_channel(c, c.emitters[0], kIonFrequency);
    const double p = 0.6 * ch.routing * 0.4 * (1.0 - std::exp(-ch.decay_rate * 3e-6));
    const double n = 400000.0;
    const double got = mean_clicks(run_lifetime(c));
    CHECK(std::abs(got - p) < 3.0 * std::sqrt(p * (1 - p) / n));
  }

  TEST_CASE("emission delays follow the enhanced exponential law") {
    ExperimentConfig c = cavity_ion(100000);
    c.sequence = PulseSequence{1e-6, 58e-6, 60e-6, 100000};
    const ClickStream s = run_lifetime(c);
    REQUIRE(s.size() > 99000);
    std::vector<double> delays;
    for (const auto& click : s.records) delays.push_back(click.t - c.sequence.t_pulse);
    const double rate = enhanced_decay_rate(kGamma0, 460.0);
    const double d = ks_exponential(delays, rate);
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(delays.size())));
  }

  TEST_CASE("sample_shot obeys gating and dead time") {
    ExperimentConfig c = cavity_ion(1);
    c.detector = DetectorModel{1.0, 2e6, 0.5e-6};
    const std::vector<DiffusionState> states(1);
    for (std::uint64_t key = 0; key < 500; ++key) {
      const auto t = sample_shot(c, kIonFrequency, key, states);
      CHECK(std::is_sorted(t.begin(), t.end()));
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t[i] >= c.sequence.window_start());
        CHECK(t[i] < c.sequence.window_end());
        if (i > 0) CHECK(t[i] - t[i - 1] >= 0.5e-6);
      }
      CHECK(t == sample_shot(c, kIonFrequency, key, states));
    }
    CHECK_THROWS_AS(sample_shot(c, kIonFrequency, 0, std::vector<DiffusionState>(2)), InvalidParameter);
  }

  TEST_CASE("streams are valid and identical across thread counts") {
    ExperimentConfig c = cavity_ion(60000, 99);
    c.emitters[0].p_max = 0.5;
    c.emitters[0].diffusion = {60e6, 20e-6, 1e12};
    c.detector = DetectorModel{0.3, 5000.0, 40e-9};
    const ClickStream serial = run_g2(c, {1});
    const ClickStream parallel = run_g2(c, {4});
    CHECK(serial.records == parallel.records);
    CHECK(serial.config_digest == parallel.config_digest);
    CHECK(validate_clickstream(serial, 40e-9));
    c.master_seed = 100;
    CHECK(run_g2(c).records != serial.records);
  }

  TEST_CASE("NEmitters replicates a template and Poissonian ignores the laser") {
    ExperimentConfig c = cavity_ion(1000);
    c.source = SourceSpec::n_emitters(3);
    CHECK(c.active_emitters().size() == 3);
    c.emitters.push_back(c.emitters[0]);
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c.emitters.push_back(c.emitters[0]);
    CHECK_NOTHROW(c.validate());

    ExperimentConfig p = cavity_ion(200000);
    p.source = SourceSpec::poissonian(0.4);
    p.cavity->p_peak = 1e6;
    p.laser_frequencies = {kIonFrequency + 1e12};
    p.sequence = PulseSequence{1e-6, 58e-6, 60e-6, 200000};
    CHECK(std::abs(mean_clicks(run_g2(p)) / 0.4 - 1.0) < 0.02);
  }

  TEST_CASE("config validation") {
    ExperimentConfig c = cavity_ion(10);
    c.laser_frequencies = {2.0, 1.0};
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = cavity_ion(10);
    c.laser_frequencies = {1.0, 2.0};
    CHECK_THROWS_AS(run_lifetime(c), InvalidParameter);
    c = cavity_ion(10);
    c.sequence.t_rep = 10e-6;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = cavity_ion(10);
    c.emitters.clear();
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
  }

  TEST_CASE("static PLE line recovers the homogeneous width") {
    ExperimentConfig c = cavity_ion(3000, 5);
    c.emitters[0].p_max = 0.8;
    c.detector.efficiency = 0.3;
    for (int i = 0; i < 61; ++i) c.laser_frequencies.push_back(kIonFrequency - 300e6 + 10e6 * i);
    c.laser_frequencies.erase(c.laser_frequencies.begin());
    const auto scans = run_ple_scan(c);
    REQUIRE(scans.size() == 1);
    CHECK(scans[0].points.size() == 61);
    for (const auto& p : scans[0].points) {
      CHECK(p.total_counts == p.stream.size());
      CHECK(validate_clickstream(p.stream));
    }
    const FitResult fit = fit_lorentzian(ple_spectra(scans).front());
    REQUIRE(fit.converged());
    CHECK(std::abs(fit.value("fwhm") / 50e6 - 1.0) < 0.05);
    CHECK(std::abs(fit.value("center") - kIonFrequency) < 2e6);
  }

  TEST_CASE("PLE diffusion clock is continuous across scans") {
    ExperimentConfig c = cavity_ion(100, 5);
    c.laser_frequencies = {kIonFrequency - 1e8, kIonFrequency, kIonFrequency + 1e8};
    c.scan_repeats = 3;
    c.inter_scan_dwell = 10.0;
    const auto scans = run_ple_scan(c);
    REQUIRE(scans.size() == 3);
    const double scan_time = 3 * 100 * 60e-6;
    CHECK(scans[0].start_wall_time == 0.0);
    CHECK(scans[1].start_wall_time == doctest::Approx(scan_time + 10.0));
    CHECK(scans[2].end_wall_time == doctest::Approx(3 * scan_time + 20.0));
    CHECK(run_ple_scan(c, {3})[2].points[1].stream.records == scans[2].points[1].stream.records);
  }
}
