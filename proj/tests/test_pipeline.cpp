#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ersim/error.hpp"
#include "ersim/ertt.hpp"
#include "ersim/physics.hpp"
#include "ersim/pipeline.hpp"
#include "ersim/tables.hpp"

using namespace ersim;
namespace fs = std::filesystem;

namespace {

const std::string kData = ERSIM_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ersim_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("run kinds") {
    CHECK(run_kind_from_string("ple") == RunKind::Ple);
    CHECK(to_string(RunKind::G2) == "g2");
    CHECK_THROWS_AS(run_kind_from_string("spectrum"), InvalidParameter);
  }

  TEST_CASE("lifetime runs produce a Purcell report") {
    const fs::path work = fresh_dir("purcell");
    const fs::path out = fresh_dir("purcell_report");
    simulate_to_directory(RunKind::Lifetime, load_config(kData + "/lifetime_cavity.ini"), (work / "cavity").string());
    simulate_to_directory(RunKind::Lifetime, load_config(kData + "/lifetime_ensemble.ini"),
                          (work / "ensemble").string());
    CHECK(fs::exists(work / "cavity" / "clicks.ertt"));
    CHECK(fs::exists(work / "cavity" / "decay_histogram.csv"));
    CHECK(fs::exists(work / "ensemble" / "config.ini"));

    const ReportOutcome r = write_report(work.string(), out.string());
    CHECK(r.unconverged.empty());
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    const double p = summary.at("purcell_factor").get<double>();
    CHECK(std::abs(p / 460.0 - 1.0) < 0.1);
    CHECK(summary.at("purcell_factor_error").get<double>() > 0.0);
    CHECK(summary.at("radiative_linewidth_hz").get<double>() ==
          doctest::Approx(radiative_linewidth(summary.at("t1_cavity_s").get<double>())));
    CHECK(fs::exists(out / "cavity_lifetime_fit.csv"));

    const CsvTable fit = read_csv((out / "cavity_lifetime_fit.csv").string());
    CHECK(fit.header == std::vector<std::string>{"parameter", "value", "uncertainty", "unit"});

    // The report is a pure function of its inputs.
    const fs::path again = fresh_dir("purcell_report_again");
    write_report(work.string(), again.string());
    CHECK(slurp(out / "summary.json") == slurp(again / "summary.json"));
    fs::remove_all(work);
    fs::remove_all(out);
    fs::remove_all(again);
  }

  TEST_CASE("g2 simulation is byte-deterministic across threads") {
    const ConfigDocument doc = load_config(kData + "/g2.ini");
    const fs::path a = fresh_dir("g2_a"), b = fresh_dir("g2_b");
    simulate_to_directory(RunKind::G2, doc, a.string(), {1});
    simulate_to_directory(RunKind::G2, doc, b.string(), {3});
    for (const char* f : {"clicks.ertt", "manifest.json", "config.ini"}) CHECK(slurp(a / f) == slurp(b / f));
    const ClickStream s = read_clickstream((a / "clicks.ertt").string(), doc.config.sequence.n_shots);
    CHECK(validate_clickstream(s, doc.config.detector.dead_time));

    const fs::path out = fresh_dir("g2_report");
    write_report(a.string(), out.string());
    const CsvTable t = read_csv((out / "ersim_pipeline_g2_a_g2.csv").string());
    CHECK(t.rows.size() == 61);
    CHECK(t.column("g2_corrected").has_value());
    CHECK(t.column("dark_floor_coincidences").has_value());
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("runs").at("ersim_pipeline_g2_a").at("g2_zero").get<double>() < 0.5);
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(out);
  }

  TEST_CASE("PLE scans are reported as a diffusion map") {
    const fs::path work = fresh_dir("ple");
    const fs::path out = fresh_dir("ple_report");
    simulate_to_directory(RunKind::Ple, load_config(kData + "/ple.ini"), work.string());
    const CsvTable t = read_csv((work / "ple_scans.csv").string());
    CHECK(t.rows.size() == 4 * 41);
    write_report(work.string(), out.string());
    const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
    const auto& run = summary.at("runs").begin().value();
    CHECK(run.at("scans").get<int>() == 4);
    CHECK(run.at("time_averaged_fwhm_hz").get<double>() > 100e6);
    CHECK(summary.contains("measured_linewidth_hz"));
    fs::remove_all(work);
    fs::remove_all(out);
  }

  TEST_CASE("report needs simulation outputs") {
    const fs::path empty = fresh_dir("empty");
    fs::create_directories(empty);
    CHECK_THROWS_AS(write_report(empty.string(), (empty / "out").string()), IoError);
    CHECK_THROWS_AS(write_report("/nonexistent/dir", "/tmp/x"), IoError);
    fs::remove_all(empty);
  }
}
