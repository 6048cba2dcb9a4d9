#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ersim/analysis.hpp"
#include "ersim/calibration.hpp"
#include "ersim/config.hpp"
#include "ersim/engine.hpp"
#include "ersim/error.hpp"
#include "ersim/ertt.hpp"
#include "ersim/physics.hpp"
#include "ersim/pipeline.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint64_t> shots_of(const ersim::ClickStream& s) {
  py::array_t<std::uint64_t> out(static_cast<py::ssize_t>(s.size()));
  auto* p = out.mutable_data();
  for (const auto& c : s.records) *p++ = c.shot;
  return out;
}

py::array_t<double> times_of(const ersim::ClickStream& s) {
  py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
  auto* p = out.mutable_data();
  for (const auto& c : s.records) *p++ = c.t;
  return out;
}

ersim::ClickStream make_stream(py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast> shots,
                               py::array_t<double, py::array::c_style | py::array::forcecast> times,
                               const ersim::PulseSequence& sequence) {
  if (shots.size() != times.size()) throw ersim::InvalidParameter("shots and times must have equal length");
  ersim::ClickStream s;
  s.sequence = sequence;
  s.records.reserve(static_cast<std::size_t>(shots.size()));
  for (py::ssize_t i = 0; i < shots.size(); ++i) s.records.push_back({shots.at(i), times.at(i)});
  return s;
}

ersim::Spectrum make_spectrum(const std::vector<double>& frequencies, const std::vector<double>& counts) {
  if (frequencies.size() != counts.size()) throw ersim::InvalidParameter("frequencies and counts differ in length");
  ersim::Spectrum s;
  for (std::size_t i = 0; i < frequencies.size(); ++i) s.points.push_back({frequencies[i], counts[i]});
  return s;
}

ersim::FitOptions fit_options(std::optional<std::vector<double>> initial, int max_iterations) {
  ersim::FitOptions o;
  o.initial = std::move(initial);
  o.lm.max_iterations = max_iterations;
  return o;
}

}  // namespace

PYBIND11_MODULE(_ersim, m) {
  m.doc() = "Monte Carlo simulation and analysis of single rare-earth ions in nanophotonic cavities";

  auto base = py::register_exception<ersim::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ersim::InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<ersim::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ersim::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ersim::IoError>(m, "IoError", base.ptr());
  py::register_exception<ersim::AnalysisError>(m, "AnalysisError", base.ptr());

  // Physics.
  m.attr("SPEED_OF_LIGHT") = ersim::kSpeedOfLight;
  m.def("wavelength_to_frequency", &ersim::wavelength_to_frequency, "wavelength"_a);
  m.def("frequency_to_wavelength", &ersim::frequency_to_wavelength, "frequency"_a);
  m.def("lorentzian", &ersim::lorentzian, "nu"_a, "center"_a, "fwhm"_a, "amplitude"_a, "baseline"_a);
  m.def("gaussian", &ersim::gaussian, "nu"_a, "center"_a, "fwhm"_a, "amplitude"_a, "baseline"_a);
  m.def("cavity_fwhm_from_q", &ersim::cavity_fwhm_from_q, "nu_cav"_a, "q_factor"_a);
  m.def("purcell_profile", &ersim::purcell_profile, "detuning"_a, "p_peak"_a, "kappa"_a);
  m.def("enhanced_decay_rate", &ersim::enhanced_decay_rate, "gamma_0"_a, "purcell"_a);
  m.def("purcell_from_lifetimes", &ersim::purcell_from_lifetimes, "t1"_a, "t1_0"_a);
  m.def("radiative_linewidth", &ersim::radiative_linewidth, "t1"_a);

  // Configuration.
  py::class_<ersim::PulseSequence>(m, "PulseSequence")
      .def(py::init<>())
      .def(py::init([](double t_pulse, double t_coll, double t_rep, std::uint64_t n_shots) {
             return ersim::PulseSequence{t_pulse, t_coll, t_rep, n_shots};
           }),
           "t_pulse"_a, "t_coll"_a, "t_rep"_a, "n_shots"_a)
      .def_readwrite("t_pulse", &ersim::PulseSequence::t_pulse)
      .def_readwrite("t_coll", &ersim::PulseSequence::t_coll)
      .def_readwrite("t_rep", &ersim::PulseSequence::t_rep)
      .def_readwrite("n_shots", &ersim::PulseSequence::n_shots);

  py::class_<ersim::ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("sequence", &ersim::ExperimentConfig::sequence)
      .def_readwrite("laser_frequencies", &ersim::ExperimentConfig::laser_frequencies)
      .def_readwrite("master_seed", &ersim::ExperimentConfig::master_seed)
      .def_readwrite("scan_repeats", &ersim::ExperimentConfig::scan_repeats)
      .def_readwrite("inter_scan_dwell", &ersim::ExperimentConfig::inter_scan_dwell)
      .def_property_readonly("emitter_count", [](const ersim::ExperimentConfig& c) { return c.emitters.size(); })
      .def_property_readonly("has_cavity", [](const ersim::ExperimentConfig& c) { return c.cavity.has_value(); })
      .def_property(
          "dark_rate", [](const ersim::ExperimentConfig& c) { return c.detector.dark_rate; },
          [](ersim::ExperimentConfig& c, double v) { c.detector.dark_rate = v; })
      .def_property(
          "efficiency", [](const ersim::ExperimentConfig& c) { return c.detector.efficiency; },
          [](ersim::ExperimentConfig& c, double v) { c.detector.efficiency = v; })
      .def("validate", &ersim::ExperimentConfig::validate)
      .def("digest", [](const ersim::ExperimentConfig& c) { return ersim::config_digest(c); });

  py::class_<ersim::ConfigDocument>(m, "ConfigDocument")
      .def_readwrite("config", &ersim::ConfigDocument::config)
      .def("serialize", [](const ersim::ConfigDocument& d) { return ersim::serialize_config(d); });
  m.def("parse_config", [](const std::string& text) { return ersim::parse_config_document(text); }, "text"_a);
  m.def("load_config", &ersim::load_config, "path"_a);

  // Click streams.
  py::class_<ersim::ClickStream>(m, "ClickStream")
      .def(py::init(&make_stream), "shots"_a, "times"_a, "sequence"_a)
      .def_readonly("sequence", &ersim::ClickStream::sequence)
      .def_readonly("config_digest", &ersim::ClickStream::config_digest)
      .def_property_readonly("shots", &shots_of)
      .def_property_readonly("times", &times_of)
      .def("__len__", &ersim::ClickStream::size)
      .def("validate", [](const ersim::ClickStream& s, double dead_time) {
        const ersim::StreamCheck c = ersim::validate_clickstream(s, dead_time);
        return py::make_tuple(c.ok, c.message);
      }, "dead_time"_a = 0.0);
  m.def("write_clickstream", &ersim::write_clickstream, "stream"_a, "path"_a);
  m.def("read_clickstream", &ersim::read_clickstream, "path"_a, "n_shots"_a = py::none());
  m.def("encode_clickstream", [](const ersim::ClickStream& s) {
    const auto b = ersim::encode_clickstream(s);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  }, "stream"_a);
  m.def("decode_clickstream", [](py::bytes data, std::optional<std::uint64_t> n_shots) {
    const std::string_view v = data;
    return ersim::decode_clickstream(
        std::span(reinterpret_cast<const std::uint8_t*>(v.data()), v.size()), n_shots);
  }, "data"_a, "n_shots"_a = py::none());

  // Simulation. The GIL is released while shots run.
  m.def("run_lifetime", [](const ersim::ExperimentConfig& c, unsigned threads) {
    py::gil_scoped_release release;
    return ersim::run_lifetime(c, {threads});
  }, "config"_a, "threads"_a = 1);
  m.def("run_g2", [](const ersim::ExperimentConfig& c, unsigned threads) {
    py::gil_scoped_release release;
    return ersim::run_g2(c, {threads});
  }, "config"_a, "threads"_a = 1);
  m.def("run_ple_scan", [](const ersim::ExperimentConfig& c, unsigned threads) {
    std::vector<ersim::PleScan> scans;
    {
      py::gil_scoped_release release;
      scans = ersim::run_ple_scan(c, {threads});
    }
    py::list out;
    for (const auto& s : scans) {
      std::vector<double> f, n;
      for (const auto& p : s.points) {
        f.push_back(p.laser_frequency);
        n.push_back(static_cast<double>(p.total_counts));
      }
      out.append(py::dict("repeat"_a = s.repeat, "start_wall_time"_a = s.start_wall_time,
                          "end_wall_time"_a = s.end_wall_time, "frequencies"_a = to_array(f),
                          "counts"_a = to_array(n)));
    }
    return out;
  }, "config"_a, "threads"_a = 1);

  // Fitting.
  py::enum_<ersim::FitStatus>(m, "FitStatus")
      .value("CONVERGED", ersim::FitStatus::Converged)
      .value("MAX_ITERATIONS", ersim::FitStatus::MaxIterations)
      .value("DEGENERATE", ersim::FitStatus::Degenerate);
  py::class_<ersim::FitResult>(m, "FitResult")
      .def_readonly("rss", &ersim::FitResult::rss)
      .def_readonly("iterations", &ersim::FitResult::iterations)
      .def_readonly("status", &ersim::FitResult::status)
      .def_readonly("message", &ersim::FitResult::message)
      .def_property_readonly("converged", &ersim::FitResult::converged)
      .def_property_readonly("values", [](const ersim::FitResult& r) {
        py::dict d;
        for (const auto& p : r.parameters) d[py::str(p.name)] = p.value;
        return d;
      })
      .def_property_readonly("errors", [](const ersim::FitResult& r) {
        py::dict d;
        for (const auto& p : r.parameters) d[py::str(p.name)] = p.uncertainty;
        return d;
      })
      .def("__getitem__", [](const ersim::FitResult& r, const std::string& k) { return r.value(k); })
      .def("__repr__", [](const ersim::FitResult& r) {
        std::string s = "FitResult(" + std::string(ersim::to_string(r.status));
        for (const auto& p : r.parameters) s += ", " + p.name + "=" + std::to_string(p.value);
        return s + ")";
      });
  m.def("lifetime_result", &ersim::lifetime_result, "t1"_a, "t1_error"_a);

  py::class_<ersim::DecayHistogram>(m, "DecayHistogram")
      .def(py::init([](double bin_width, std::vector<double> counts) {
             return ersim::DecayHistogram{bin_width, std::move(counts), 0};
           }),
           "bin_width"_a, "counts"_a)
      .def_readonly("bin_width", &ersim::DecayHistogram::bin_width)
      .def_property_readonly("counts", [](const ersim::DecayHistogram& h) { return to_array(h.counts); })
      .def_readonly("total_shots", &ersim::DecayHistogram::total_shots);
  m.def("histogram_arrivals", &ersim::histogram_arrivals, "stream"_a, "bin_width"_a);
  m.def("fit_exponential", [](const ersim::DecayHistogram& h, std::optional<std::vector<double>> initial,
                              int max_iterations) { return ersim::fit_exponential(h, fit_options(initial, max_iterations)); },
        "histogram"_a, "initial"_a = py::none(), "max_iterations"_a = 500);
  m.def("fit_lorentzian", [](const std::vector<double>& f, const std::vector<double>& c,
                             std::optional<std::vector<double>> initial, int max_iterations) {
    return ersim::fit_lorentzian(make_spectrum(f, c), fit_options(initial, max_iterations));
  }, "frequencies"_a, "counts"_a, "initial"_a = py::none(), "max_iterations"_a = 500);
  m.def("fit_gaussian", [](const std::vector<double>& f, const std::vector<double>& c,
                           std::optional<std::vector<double>> initial, int max_iterations) {
    return ersim::fit_gaussian(make_spectrum(f, c), fit_options(initial, max_iterations));
  }, "frequencies"_a, "counts"_a, "initial"_a = py::none(), "max_iterations"_a = 500);
  m.def("purcell_report", [](const ersim::FitResult& t1, const ersim::FitResult& t1_0) {
    const auto p = ersim::purcell_report(t1, t1_0);
    return py::make_tuple(p.purcell, p.uncertainty);
  }, "t1_fit"_a, "t1_0_fit"_a);

  // Correlation and background.
  m.def("pulsed_g2", [](const ersim::ClickStream& s, int max_offset) {
    ersim::CorrelationHistogram h;
    {
      py::gil_scoped_release release;
      h = ersim::pulsed_g2(s, max_offset);
    }
    std::vector<double> offsets;
    for (int d = -max_offset; d <= max_offset; ++d) offsets.push_back(d);
    return py::dict("offsets"_a = to_array(offsets), "coincidences"_a = to_array(h.coincidences),
                    "shot_pairs"_a = to_array(h.shot_pairs), "g2"_a = to_array(h.g2),
                    "g2_error"_a = to_array(h.g2_error), "normalization"_a = h.normalization,
                    "empty"_a = h.empty, "n_clicks"_a = h.n_clicks);
  }, "stream"_a, "max_offset"_a = 30);
  m.def("dark_count_floor", [](double s, double dark_rate, double t_coll, std::uint64_t n_shots, int max_offset) {
    return to_array(ersim::dark_count_floor(s, dark_rate, t_coll, n_shots, max_offset).expected);
  }, "signal_rate_per_shot"_a, "dark_rate"_a, "t_coll"_a, "n_shots"_a, "max_offset"_a = 30);
  m.def("background_corrected_g2", &ersim::background_corrected_g2, "g2_raw"_a, "rho"_a);
  m.def("signal_fraction", &ersim::signal_fraction, "clicks_per_shot"_a, "dark_rate"_a, "t_coll"_a);
  m.def("spectral_diffusion_map", [](const std::vector<double>& f, const std::vector<std::vector<double>>& scans) {
    std::vector<ersim::Spectrum> spectra;
    for (const auto& c : scans) spectra.push_back(make_spectrum(f, c));
    const auto map = ersim::spectral_diffusion_map(spectra);
    return py::dict("scan_fwhm"_a = to_array(map.scan_fwhm), "mean_scan_fwhm"_a = map.mean_scan_fwhm,
                    "averaged_fwhm"_a = map.averaged_fwhm, "averaged_counts"_a = to_array(map.averaged.counts()),
                    "averaged_fit"_a = map.averaged_fit);
  }, "frequencies"_a, "scans"_a);

  // Directory workflows.
  m.def("simulate_to_directory", [](const std::string& kind, const ersim::ConfigDocument& doc,
                                    const std::string& out_dir, unsigned threads) {
    ersim::SimulationOutputs o;
    {
      py::gil_scoped_release release;
      o = ersim::simulate_to_directory(ersim::run_kind_from_string(kind), doc, out_dir, {threads});
    }
    return py::dict("files"_a = o.files, "clicks"_a = o.clicks);
  }, "kind"_a, "document"_a, "out_dir"_a, "threads"_a = 1);
  m.def("write_report", [](const std::string& in_dir, const std::string& out_dir, int max_offset) {
    const auto r = ersim::write_report(in_dir, out_dir, max_offset);
    return py::dict("files"_a = r.files, "unconverged"_a = r.unconverged);
  }, "in_dir"_a, "out_dir"_a, "max_offset"_a = 30);
}
