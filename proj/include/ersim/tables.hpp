#pragma once

// Comma-separated tabular exports. Every numeric column header carries its unit.

#include <optional>
#include <string>
#include <vector>

#include "ersim/analysis.hpp"
#include "ersim/fit.hpp"

namespace ersim {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& values);
  /// Index of a column by header name, or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
};

/// Shortest text that parses back to the same double.
std::string format_number(double v);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
void write_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

CsvTable spectrum_table(const Spectrum& spectrum);
/// Reads frequency_hz plus the counts column, or the first other column if there is none.
Spectrum spectrum_from_table(const CsvTable& table);

CsvTable histogram_table(const DecayHistogram& hist);
DecayHistogram histogram_from_table(const CsvTable& table);

struct CorrelationColumns {
  std::optional<double> rho;                 // adds g2_corrected
  std::optional<std::vector<double>> floor;  // adds dark_floor_coincidences
};

CsvTable correlation_table(const CorrelationHistogram& hist, const CorrelationColumns& extra = {});

CsvTable fit_table(const FitResult& fit);

CsvTable diffusion_map_table(const SpectralDiffusionMap& map);

}  // namespace ersim
