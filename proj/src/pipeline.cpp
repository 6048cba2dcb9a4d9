#include "ersim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "ersim/analysis.hpp"
#include "ersim/ertt.hpp"
#include "ersim/error.hpp"
#include "ersim/tables.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ersim {

namespace {

constexpr int kLifetimeBins = 200;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json fit_json(const FitResult& fit) {
  json j;
  j["status"] = std::string(to_string(fit.status));
  for (const auto& p : fit.parameters) {
    const std::string suffix = p.unit == "Hz" ? "_hz" : p.unit == "s" ? "_s" : "";
    j[p.name + suffix] = std::isfinite(p.value) ? json(p.value) : json(nullptr);
    j[p.name + suffix + "_error"] = std::isfinite(p.uncertainty) ? json(p.uncertainty) : json(nullptr);
  }
  return j;
}

}  // namespace

std::string_view to_string(RunKind kind) {
  switch (kind) {
    case RunKind::Ple:
      return "ple";
    case RunKind::Lifetime:
      return "lifetime";
    case RunKind::G2:
      return "g2";
  }
  return "unknown";
}

RunKind run_kind_from_string(std::string_view name) {
  if (name == "ple") return RunKind::Ple;
  if (name == "lifetime") return RunKind::Lifetime;
  if (name == "g2") return RunKind::G2;
  throw InvalidParameter("unknown run kind '" + std::string(name) + "'");
}

SimulationOutputs simulate_to_directory(RunKind kind, const ConfigDocument& doc, const std::string& out_dir,
                                        const RunOptions& options) {
  const ExperimentConfig& cfg = doc.config;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);
  SimulationOutputs out;

  json manifest;
  manifest["kind"] = std::string(to_string(kind));
  manifest["config_digest"] = hex(config_digest(cfg));
  manifest["master_seed"] = cfg.master_seed;
  manifest["n_shots"] = cfg.sequence.n_shots;
  manifest["has_cavity"] = cfg.cavity.has_value();
  manifest["dark_rate_hz"] = cfg.detector.dark_rate;
  manifest["t_coll_s"] = cfg.sequence.t_coll;
  manifest["t_rep_s"] = cfg.sequence.t_rep;

  switch (kind) {
    case RunKind::Lifetime:
    case RunKind::G2: {
      const ClickStream stream = kind == RunKind::Lifetime ? run_lifetime(cfg, options) : run_g2(cfg, options);
      write_clickstream(stream, (dir / "clicks.ertt").string());
      out.files.push_back((dir / "clicks.ertt").string());
      out.clicks = stream.size();
      if (kind == RunKind::Lifetime) {
        const double bin = cfg.sequence.t_coll / kLifetimeBins;
        manifest["bin_width_s"] = bin;
        write_csv(histogram_table(histogram_arrivals(quantize_to_ns(stream), bin)),
                  (dir / "decay_histogram.csv").string());
        out.files.push_back((dir / "decay_histogram.csv").string());
      }
      break;
    }
    case RunKind::Ple: {
      const auto scans = run_ple_scan(cfg, options);
      CsvTable t;
      t.header = {"scan", "laser_frequency_hz", "detuning_mhz", "counts", "scan_start_s"};
      for (const auto& scan : scans) {
        for (const auto& p : scan.points) {
          t.add({static_cast<double>(scan.repeat), p.laser_frequency, (p.laser_frequency - doc.scan.laser) * 1e-6,
                 static_cast<double>(p.total_counts), scan.start_wall_time});
          out.clicks += p.total_counts;
        }
      }
      manifest["scans"] = scans.size();
      write_csv(t, (dir / "ple_scans.csv").string());
      out.files.push_back((dir / "ple_scans.csv").string());
      break;
    }
  }
  manifest["clicks"] = out.clicks;
  write_text(dir / "config.ini", serialize_config(doc));
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  out.files.push_back((dir / "config.ini").string());
  out.files.push_back((dir / "manifest.json").string());
  return out;
}

ReportOutcome write_report(const std::string& in_dir, const std::string& out_dir, int max_offset) {
  if (!fs::is_directory(in_dir)) throw IoError("not a directory: " + in_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path root(in_dir);
  const fs::path dest(out_dir);

  std::vector<fs::path> runs;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json") runs.push_back(entry.path().parent_path());
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw IoError("no simulation outputs (manifest.json) under " + in_dir);

  ReportOutcome outcome;
  json summary;
  json runs_json = json::object();
  const FitResult* cavity_fit = nullptr;
  const FitResult* reference_fit = nullptr;
  std::map<std::string, FitResult> lifetime_fits;
  std::optional<double> measured_linewidth;

  const auto save = [&](const CsvTable& t, const std::string& name) {
    write_csv(t, (dest / name).string());
    outcome.files.push_back((dest / name).string());
  };

  for (const fs::path& run : runs) {
    std::string name = fs::relative(run, root).generic_string();
    if (name == ".") name = run.filename().string();
    std::string stem = name;
    std::replace(stem.begin(), stem.end(), '/', '_');
    const json manifest = read_json(run / "manifest.json");
    const RunKind kind = run_kind_from_string(manifest.at("kind").get<std::string>());
    json r;
    r["kind"] = std::string(to_string(kind));
    r["config_digest"] = manifest.at("config_digest");

    if (kind == RunKind::Lifetime) {
      const DecayHistogram hist = histogram_from_table(read_csv((run / "decay_histogram.csv").string()));
      FitResult fit = fit_exponential(hist);
      save(histogram_table(hist), stem + "_decay_histogram.csv");
      save(fit_table(fit), stem + "_lifetime_fit.csv");
      r["fit"] = fit_json(fit);
      r["has_cavity"] = manifest.at("has_cavity");
      if (!fit.converged()) outcome.unconverged.push_back(name);
      auto& stored = lifetime_fits[name] = std::move(fit);
      if (stored.converged()) {
        if (manifest.at("has_cavity").get<bool>()) {
          if (!cavity_fit) cavity_fit = &stored;
        } else if (!reference_fit) {
          reference_fit = &stored;
        }
      }
    } else if (kind == RunKind::G2) {
      const auto n_shots = manifest.at("n_shots").get<std::uint64_t>();
      const ClickStream stream = read_clickstream((run / "clicks.ertt").string(), n_shots);
      const CorrelationHistogram h = pulsed_g2(stream, max_offset);
      const double dark_rate = manifest.at("dark_rate_hz").get<double>();
      const double t_coll = manifest.at("t_coll_s").get<double>();
      const double per_shot = static_cast<double>(stream.size()) / static_cast<double>(n_shots);
      CorrelationColumns extra;
      if (!h.empty && per_shot > 0.0) {
        const double rho = signal_fraction(per_shot, dark_rate, t_coll);
        const double signal = per_shot - dark_rate * t_coll;
        extra.floor = dark_count_floor(std::max(signal, 0.0), dark_rate, t_coll, n_shots, max_offset).expected;
        r["signal_fraction"] = rho;
        if (rho > 0.0) {
          extra.rho = rho;
          if (std::isfinite(h.g2_at(0))) r["g2_zero_corrected"] = background_corrected_g2(h.g2_at(0), rho);
        }
      }
      save(correlation_table(h, extra), stem + "_g2.csv");
      r["max_offset_shots"] = max_offset;
      r["clicks_per_shot"] = per_shot;
      r["g2_zero"] = std::isfinite(h.g2_at(0)) ? json(h.g2_at(0)) : json(nullptr);
      r["g2_zero_error"] = std::isfinite(h.g2_error[h.index(0)]) ? json(h.g2_error[h.index(0)]) : json(nullptr);
    } else {
      const CsvTable t = read_csv((run / "ple_scans.csv").string());
      const auto scan_col = t.column("scan");
      const auto f_col = t.column("laser_frequency_hz");
      const auto c_col = t.column("counts");
      if (!scan_col || !f_col || !c_col) throw FormatError(name + ": ple_scans.csv lacks required columns");
      std::map<long, Spectrum> by_scan;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        Spectrum& s = by_scan[std::lround(t.number(i, *scan_col))];
        s.points.push_back({t.number(i, *f_col), t.number(i, *c_col)});
      }
      std::vector<Spectrum> scans;
      for (auto& [k, s] : by_scan) scans.push_back(std::move(s));
      if (scans.size() >= 2) {
        const SpectralDiffusionMap map = spectral_diffusion_map(scans);
        save(diffusion_map_table(map), stem + "_diffusion_map.csv");
        save(spectrum_table(map.averaged), stem + "_averaged_spectrum.csv");
        save(fit_table(map.averaged_fit), stem + "_averaged_fit.csv");
        r["scans"] = scans.size();
        r["mean_single_scan_fwhm_hz"] = map.mean_scan_fwhm;
        r["time_averaged_fwhm_hz"] = map.averaged_fwhm;
        json per_scan = json::array();
        for (double f : map.scan_fwhm) per_scan.push_back(std::isfinite(f) ? json(f) : json(nullptr));
        r["single_scan_fwhm_hz"] = per_scan;
        if (!map.averaged_fit.converged()) outcome.unconverged.push_back(name);
        if (std::isfinite(map.mean_scan_fwhm) && !measured_linewidth) measured_linewidth = map.mean_scan_fwhm;
      } else {
        const FitResult fit = fit_gaussian(scans.front());
        save(spectrum_table(scans.front()), stem + "_spectrum.csv");
        save(fit_table(fit), stem + "_gaussian_fit.csv");
        r["fit"] = fit_json(fit);
        if (!fit.converged()) outcome.unconverged.push_back(name);
        else if (!measured_linewidth) measured_linewidth = std::abs(fit.value("fwhm"));
      }
    }
    runs_json[name] = r;
  }

  summary["runs"] = runs_json;
  if (cavity_fit && reference_fit) {
    const PurcellEstimate p = purcell_report(*cavity_fit, *reference_fit);
    summary["purcell_factor"] = p.purcell;
    summary["purcell_factor_error"] = p.uncertainty;
    summary["t1_cavity_s"] = cavity_fit->value("t1");
    summary["t1_reference_s"] = reference_fit->value("t1");
  }
  if (cavity_fit) {
    summary["radiative_linewidth_hz"] = radiative_linewidth(cavity_fit->value("t1"));
  }
  if (measured_linewidth) summary["measured_linewidth_hz"] = *measured_linewidth;
  write_text(dest / "summary.json", summary.dump(2) + "\n");
  outcome.files.push_back((dest / "summary.json").string());
  return outcome;
}

}  // namespace ersim
