#pragma once

// Directory-level workflows behind the command-line tool: run a simulation into
// an output directory, and turn a tree of such directories into a report bundle.

#include <string>
#include <vector>

#include "ersim/config.hpp"
#include "ersim/engine.hpp"

namespace ersim {

enum class RunKind { Ple, Lifetime, G2 };

std::string_view to_string(RunKind kind);
RunKind run_kind_from_string(std::string_view name);

struct SimulationOutputs {
  std::vector<std::string> files;
  std::uint64_t clicks = 0;
};

/// Writes config.ini, manifest.json and the kind-specific data files into `out_dir`.
///   lifetime: clicks.ertt, decay_histogram.csv
///   g2:       clicks.ertt
///   ple:      ple_scans.csv
SimulationOutputs simulate_to_directory(RunKind kind, const ConfigDocument& doc,
                                        const std::string& out_dir, const RunOptions& options = {});

struct ReportOutcome {
  std::vector<std::string> files;
  /// Names of runs whose fits did not converge.
  std::vector<std::string> unconverged;
};

/// Scans `in_dir` (and its subdirectories) for simulation outputs and writes
/// summary.json plus per-run CSV tables into `out_dir`.
ReportOutcome write_report(const std::string& in_dir, const std::string& out_dir, int max_offset = 30);

}  // namespace ersim
