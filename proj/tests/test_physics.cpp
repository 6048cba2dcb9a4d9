#include <doctest.h>

#include <cmath>
#include <random>

#include "ersim/error.hpp"
#include "ersim/physics.hpp"

using namespace ersim;

namespace {
const double kNuCav = wavelength_to_frequency(1532.8e-9);
}

TEST_SUITE("physics") {
  TEST_CASE("lorentzian peak, half maximum and bad width") {
    CHECK(lorentzian(3.0, 3.0, 0.7, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(lorentzian(3.35, 3.0, 0.7, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(lorentzian(2.65, 3.0, 0.7, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(lorentzian(1.0, 1.0, 2.0, -0.8, 1.0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(lorentzian(0.0, 0.0, 0.0, 1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(lorentzian(0.0, 0.0, -1.0, 1.0, 0.0), InvalidParameter);
  }

  TEST_CASE("lorentzian is symmetric about its center") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1e10, 1e10);
    for (int i = 0; i < 1000; ++i) {
      const double x = u(gen);
      CHECK(lorentzian(kNuCav + x, kNuCav, 4.7e9, 1.0, 0.1) == lorentzian(kNuCav - x, kNuCav, 4.7e9, 1.0, 0.1));
    }
  }

  TEST_CASE("cavity linewidth from Q") {
    // c / 1532.8 nm at Q = 4.14e4 gives 4.7243 GHz, the reported 4.7 GHz within 1%.
    const double fwhm = cavity_fwhm_from_q(kNuCav, 4.14e4);
    CHECK(kNuCav == doctest::Approx(1.9559e14).epsilon(1e-4));
    CHECK(fwhm == doctest::Approx(4.724271737869757e9).epsilon(1e-12));
    CHECK(std::abs(fwhm / 4.7e9 - 1.0) < 0.01);
    CHECK(cavity_fwhm_from_q(1.0, 1.0) == 1.0);
    CHECK(cavity_fwhm_from_q(kNuCav, 2 * 4.14e4) == fwhm / 2);
    CHECK_THROWS_AS(cavity_fwhm_from_q(kNuCav, 0.0), InvalidParameter);
    CHECK_THROWS_AS(cavity_fwhm_from_q(kNuCav, -3.0), InvalidParameter);
  }

  TEST_CASE("Purcell detuning profile") {
    const double kappa = 4.7e9;
    CHECK(purcell_profile(0.0, 460.0, kappa) == 460.0);
    CHECK(purcell_profile(kappa / 2, 460.0, kappa) == doctest::Approx(230.0));
    CHECK(purcell_profile(kappa, 460.0, kappa) == doctest::Approx(92.0));
    CHECK_THROWS_AS(purcell_profile(0.0, 460.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(purcell_profile(0.0, -1.0, kappa), InvalidParameter);
    double prev = purcell_profile(0.0, 460.0, kappa);
    for (double d = 1e7; d < 1e11; d *= 1.3) {
      CHECK(purcell_profile(d, 460.0, kappa) == purcell_profile(-d, 460.0, kappa));
      const double p = purcell_profile(d, 460.0, kappa);
      CHECK(p <= prev);
      prev = p;
    }
  }

  TEST_CASE("enhanced decay and lifetime Purcell factor") {
    const double gamma_0 = 1.0 / 1.12e-3;
    CHECK(1.0 / enhanced_decay_rate(gamma_0, 460.0) == doctest::Approx(2.43e-6).epsilon(0.001));
    CHECK(enhanced_decay_rate(gamma_0, 0.0) == gamma_0);
    CHECK(enhanced_decay_rate(1.0, 1.0) == 2.0);
    CHECK(purcell_from_lifetimes(2.43e-6, 1.12e-3) == doctest::Approx(459.905).epsilon(1e-5));
    CHECK(std::round(purcell_from_lifetimes(2.43e-6, 1.12e-3)) == 460.0);
    CHECK(purcell_from_lifetimes(3.3e-6, 3.3e-6) == 0.0);
    CHECK(purcell_from_lifetimes(1.0, 2.0) == 1.0);
    CHECK_THROWS_AS(purcell_from_lifetimes(0.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(purcell_from_lifetimes(1.0, -1.0), InvalidParameter);
    CHECK_THROWS_AS(enhanced_decay_rate(0.0, 1.0), InvalidParameter);
  }

  TEST_CASE("Purcell round trip through decay rates") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> p_dist(0.0, 1e4);
    std::uniform_real_distribution<double> g_dist(1.0, 1e6);
    for (int i = 0; i < 2000; ++i) {
      const double p = p_dist(gen);
      const double g0 = g_dist(gen);
      const double back = purcell_from_lifetimes(1.0 / enhanced_decay_rate(g0, p), 1.0 / g0);
      CHECK(std::abs(back - p) <= 1e-12 * std::max(p, 1.0) * 10);
    }
  }

  TEST_CASE("radiative linewidth") {
    CHECK(radiative_linewidth(2.43e-6) == doctest::Approx(65495.86135468945).epsilon(1e-12));
    CHECK(std::abs(radiative_linewidth(2.43e-6) / 65.5e3 - 1.0) < 1e-3);
    CHECK(radiative_linewidth(1.0 / (2.0 * kPi)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(radiative_linewidth(1.12e-3) == doctest::Approx(142.1).epsilon(1e-3));
    CHECK_THROWS_AS(radiative_linewidth(0.0), InvalidParameter);
    for (double t1 = 1e-9; t1 < 1.0; t1 *= 3.7)
      CHECK(radiative_linewidth(t1) * 2.0 * kPi * t1 == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("excitation probability") {
    CHECK(excitation_probability(0.0, 50e6, 0.7) == 0.7);
    CHECK(excitation_probability(25e6, 50e6, 0.7) == doctest::Approx(0.35));
    CHECK(excitation_probability(1e15, 50e6, 0.7) < 1e-14);
    CHECK_THROWS_AS(excitation_probability(0.0, 0.0, 0.5), InvalidParameter);
    CHECK_THROWS_AS(excitation_probability(0.0, 1e6, 0.0), InvalidParameter);
    CHECK_THROWS_AS(excitation_probability(0.0, 1e6, 1.5), InvalidParameter);
  }

  TEST_CASE("branching ratio into the cavity") {
    CHECK(cavity_branching_ratio(0.0) == 0.0);
    CHECK(cavity_branching_ratio(460.0) == doctest::Approx(460.0 / 461.0));
  }

  TEST_CASE("cavity tuning steps") {
    CavityModel cav{195.59e12, 4.14e4, 460.0, "0.4 (lambda/n)^3", 0};
    const CavityModel red = apply_tuning_step(cav, {TuningKind::AdsorbN2, 1e9});
    CHECK(red.center() == doctest::Approx(195.589e12).epsilon(1e-15));
    CHECK(red.q_factor == cav.q_factor);
    CHECK(red.p_peak == cav.p_peak);
    const CavityModel back = apply_tuning_step(red, {TuningKind::HeatBlueshift, 1e9});
    CHECK(back.center() == cav.center());
    CHECK_THROWS_AS(apply_tuning_step(cav, {TuningKind::AdsorbN2, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(apply_tuning_step(cav, {TuningKind::HeatBlueshift, -5.0}), InvalidParameter);
  }

  TEST_CASE("adsorption is monotone and heating reverses it exactly") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> mag(0.01, 5e9);
    CavityModel cav{wavelength_to_frequency(1532.8e-9), 4.14e4, 460.0, "", 0};
    for (int i = 0; i < 200; ++i) {
      const double m = mag(gen);
      const CavityModel red = apply_tuning_step(cav, {TuningKind::AdsorbN2, m});
      CHECK(red.center() <= cav.center());
      CHECK(apply_tuning_step(red, {TuningKind::HeatBlueshift, m}).center() == cav.center());
      cav = red;
    }
  }

  TEST_CASE("model invariants") {
    EmitterModel e{195.59e12, 1.0 / 1.12e-3, 50e6, 0.5, {}};
    CHECK_NOTHROW(e.validate());
    e.p_max = 0.0;
    CHECK_THROWS_AS(e.validate(), InvalidParameter);
    e.p_max = 0.5;
    e.diffusion.sigma_fast = -1.0;
    CHECK_THROWS_AS(e.validate(), InvalidParameter);
    DetectorModel d{1.2, 0.0, 0.0};
    CHECK_THROWS_AS(d.validate(), InvalidParameter);
    CavityModel c{195.59e12, 0.0, 1.0, "", 0};
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    CHECK(SpectralDiffusionParams{}.is_static());
  }
}
